#pragma once

#include <Eigen/Core>

#include "xnlu/tensor.hpp"

namespace xnlu::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

inline MatrixMap as_matrix(Tensor& t) { return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())}; }
inline ConstMatrixMap as_matrix(const Tensor& t) {
  return {t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
inline VectorMap as_vector(Tensor& t) { return {t.data(), static_cast<Eigen::Index>(t.size())}; }
inline ConstVectorMap as_vector(const Tensor& t) { return {t.data(), static_cast<Eigen::Index>(t.size())}; }

}  // namespace xnlu::detail
