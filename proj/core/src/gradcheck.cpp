#include "xnlu/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "xnlu/error.hpp"

namespace xnlu {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

namespace {

double evaluate(const std::function<Var(Graph&)>& loss) {
  Graph g(false);
  const double v = loss(g).scalar();
  if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Var(Graph&)>& loss, std::span<Parameter* const> params, double eps) {
  require(eps > 0.0, "grad_check: eps must be positive");
  Gradients analytic(params);
  {
    Graph g;
    Var l = loss(g);
    if (!std::isfinite(l.scalar())) throw NumericError("grad_check: loss is not finite");
    g.backward(l);
    g.accumulate(analytic);
  }
  GradCheckReport report;
  for (Parameter* p : params) {
    const Tensor& a = analytic.slot(*p);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double up = evaluate(loss);
      p->value[i] = saved - eps;
      const double down = evaluate(loss);
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = relative_error(a[i], numeric);
      if (err > report.max_relative_error || report.worst_parameter.empty()) {
        report.max_relative_error = std::max(report.max_relative_error, err);
        report.worst_parameter = p->name;
        report.worst_index = i;
        report.worst_analytic = a[i];
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

double grad_check(const std::function<double(std::span<const double>)>& f, std::span<const double> analytic,
                  std::vector<double> theta, double eps) {
  require(analytic.size() == theta.size(), "grad_check: analytic gradient size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double up = f(theta);
    theta[i] = saved - eps;
    const double down = f(theta);
    theta[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) throw NumericError("grad_check: function is not finite");
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * eps)));
  }
  return worst;
}

}  // namespace xnlu
