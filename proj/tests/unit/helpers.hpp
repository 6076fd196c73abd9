#pragma once

#include <filesystem>
#include <string>

#include "xnlu/corpus.hpp"
#include "xnlu/random.hpp"
#include "xnlu/tensor.hpp"

namespace xnlu::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("xnlu-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline AnnotatedUtterance utterance(std::string id, std::vector<std::string> tokens, std::string domain,
                                    std::string intent, std::vector<SlotSpan> slots = {},
                                    std::string language = "en") {
  return {std::move(id), std::move(language), std::move(tokens), std::move(domain), std::move(intent),
          std::move(slots)};
}

}  // namespace xnlu::testing
