#pragma once

// Local Outlier Factor over Euclidean distance. Inputs are z-scored per
// dimension first (star counts dwarf contributor counts by orders of
// magnitude); zero-variance dimensions are dropped.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sgp/common.hpp"

namespace sgp {

namespace detail {

/// Per-dimension z-score standardization. Dimensions with zero variance
/// carry no distance information and are removed.
inline std::vector<std::vector<double>> standardize(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  const std::size_t dims = points.empty() ? 0 : points.front().size();
  std::vector<double> mean(dims, 0.0), sd(dims, 0.0);
  for (const auto& p : points) {
    for (std::size_t d = 0; d < dims; ++d) mean[d] += p[d];
  }
  for (std::size_t d = 0; d < dims; ++d) mean[d] /= static_cast<double>(n);
  for (const auto& p : points) {
    for (std::size_t d = 0; d < dims; ++d) {
      const double diff = p[d] - mean[d];
      sd[d] += diff * diff;
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t d = 0; d < dims; ++d) {
    sd[d] = std::sqrt(sd[d] / static_cast<double>(n));
    if (sd[d] > 0.0) keep.push_back(d);
  }
  std::vector<std::vector<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].reserve(keep.size());
    for (std::size_t d : keep) out[i].push_back((points[i][d] - mean[d]) / sd[d]);
  }
  return out;
}

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

}  // namespace detail

/// Classic LOF. The k-distance neighborhood includes distance ties, the
/// local reachability density uses reach-dist_k(p,o) = max(k-distance(o),
/// d(p,o)) with a 1e-12 guard in the denominator, and LOF(p) is the mean
/// lrd ratio over the neighborhood. Scores are ~1 for inliers.
inline std::vector<double> lof_scores(const std::vector<std::vector<double>>& raw_points, int k) {
  const std::size_t n = raw_points.size();
  if (static_cast<int>(n) <= k) {
    throw error("InsufficientPoints",
                "LOF requires more than k=" + std::to_string(k) + " points, got " +
                    std::to_string(n));
  }
  if (k < 1) throw error("InsufficientPoints", "LOF requires k >= 1");
  for (const auto& p : raw_points) {
    if (p.size() != raw_points.front().size()) {
      throw error("DimensionMismatch", "LOF points must share one dimensionality");
    }
  }

  const std::vector<std::vector<double>> points = detail::standardize(raw_points);

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i][j] = dist[j][i] = detail::euclidean(points[i], points[j]);
    }
  }

  std::vector<double> k_distance(n, 0.0);
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> others;
    others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(dist[i][j]);
    }
    std::nth_element(others.begin(), others.begin() + (k - 1), others.end());
    k_distance[i] = others[static_cast<std::size_t>(k - 1)];
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && dist[i][j] <= k_distance[i]) neighbors[i].push_back(j);
    }
  }

  std::vector<double> lrd(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double reach_sum = 0.0;
    for (std::size_t o : neighbors[i]) {
      reach_sum += std::max(k_distance[o], dist[i][o]);
    }
    lrd[i] = static_cast<double>(neighbors[i].size()) / (reach_sum + 1e-12);
  }

  std::vector<double> lof(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double ratio_sum = 0.0;
    for (std::size_t o : neighbors[i]) ratio_sum += lrd[o] / lrd[i];
    lof[i] = ratio_sum / static_cast<double>(neighbors[i].size());
  }
  return lof;
}

}  // namespace sgp
