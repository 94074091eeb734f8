#pragma once

// Shared oracles for the test suites. Everything here is written directly
// from the defining formulas, independently of the library internals, so a
// library bug cannot cancel against the reference computation.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "selftune/rng.hpp"
#include "selftune/types.hpp"

namespace testsup {

using selftune::Index;
using selftune::Mat;
using selftune::Vec;

inline Mat random_cloud(Index n, int d, selftune::Rng& rng,
                        double scale = 1.0) {
  Mat out(n, d);
  for (Index i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) out(i, c) = rng.uniform(-scale, scale);
  return out;
}

// plain scalar loop, same accumulation order as a naive implementation
inline double sq_dist_oracle(const Mat& refs, Index j,
                             const Eigen::RowVectorXd& q) {
  double acc = 0.0;
  for (Index c = 0; c < refs.cols(); ++c) {
    const double diff = refs(j, c) - q[c];
    acc += diff * diff;
  }
  return acc;
}

// full-sort kNN reference: (squared distance, index) ascending
inline std::vector<std::pair<double, Index>> brute_knn(
    const Mat& refs, const Eigen::RowVectorXd& q, int k,
    Index exclude_idx = -1) {
  std::vector<std::pair<double, Index>> all;
  for (Index j = 0; j < refs.rows(); ++j) {
    if (j == exclude_idx) continue;
    all.emplace_back(sq_dist_oracle(refs, j, q), j);
  }
  std::sort(all.begin(), all.end());
  all.resize(static_cast<std::size_t>(k));
  return all;
}

// Kolmogorov-Smirnov distance of samples against a CDF
template <typename Cdf>
double ks_distance(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(f - i / n, (i + 1) / n - f));
  }
  return d;
}

}  // namespace testsup
