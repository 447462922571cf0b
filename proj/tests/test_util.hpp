//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_TESTS_TEST_UTIL_HPP_
#define RIGIDFLOW_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rigidflow::testing {

// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)> &cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Two-sample KS statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x)
      ++i;
    while (j < b.size() && b[j] <= x)
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size()
                             - static_cast<double>(j) / b.size()));
  }
  return d;
}

// CDF of the Haar rotation angle, the integral of (1 - cos t) / pi.
inline double haar_angle_cdf(double theta) {
  return (theta - std::sin(theta)) / std::numbers::pi;
}

// Rotation angle by the plain clamped trace formula. Independent of the
// library's atan2-based implementation.
inline double trace_angle(const Eigen::Matrix3d &r) {
  return std::acos(std::clamp((r.trace() - 1) / 2, -1.0, 1.0));
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rigidflow::testing

#endif  // RIGIDFLOW_TESTS_TEST_UTIL_HPP_
