#pragma once

// Shared helpers for the unit tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "dgm/network.hpp"
#include "dgm/points.hpp"
#include "dgm/random.hpp"
#include "dgm/sampler.hpp"

namespace dgm::test {

/// Glorot weights plus non-zero biases, so no layer sits exactly at the origin.
inline NetworkParams random_params(const Architecture& arch, std::uint64_t seed, double bias = 0.5) {
  NetworkParams p = init_params(arch, seed);
  Rng rng(mix_seed(seed, 77));
  for (Net net : {Net::velocity, Net::pressure}) {
    auto th = p.theta(net);
    for (const LayerShape& s : p.layout(net).layers())
      for (std::size_t i = 0; i < s.out; ++i) th[s.bias_offset + i] = rng.uniform(-bias, bias);
  }
  return p;
}

inline PointSet random_interior(std::size_t dim, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointSet pts(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    sample_interior_point(rng, x);
    pts.push_back(x);
  }
  return pts;
}

inline PointSet random_boundary(std::size_t dim, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointSet pts(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    sample_boundary_point(rng, x);
    pts.push_back(x);
  }
  return pts;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dgm_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
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
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace dgm::test
