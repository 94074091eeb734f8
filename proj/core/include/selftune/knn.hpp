#pragma once

#include <vector>

#include "selftune/types.hpp"

namespace selftune {

// Exact nearest-neighbor queries against a fixed reference set. Uses a
// kd-tree with bounding-box pruning for dim <= 16 and falls back to brute
// force above that (space partitions stop paying off in high dimension).
// Both paths evaluate distances with the same scalar loop, so results agree
// bit-for-bit.
class SpatialIndex {
 public:
  explicit SpatialIndex(Mat refs);

  Index size() const { return refs_.rows(); }
  int dim() const { return static_cast<int>(refs_.cols()); }
  bool brute_force() const { return brute_; }
  const double* point(Index j) const { return refs_.row(j).data(); }

  // k nearest references, ascending by (distance, index). exclude_idx >= 0
  // skips that reference row (for self-queries). Returned distances are
  // Euclidean, squared = false semantics.
  void knn(const double* q, int k, Index exclude_idx,
           std::vector<double>* dist, std::vector<Index>* idx) const;

  // all references with ||y_j - q|| <= r, ascending index order
  void radius(const double* q, double r, std::vector<Index>* out) const;

 private:
  struct Node {
    Index begin = 0, end = 0;  // leaf range into perm_
    int left = -1, right = -1;
    std::vector<double> lo, hi;  // bounding box
  };

  int build_node(Index begin, Index end);
  double box_dist2(const Node& n, const double* q) const;
  void knn_rec(int node, const double* q, int k, Index exclude_idx,
               std::vector<std::pair<double, Index>>* heap) const;
  void radius_rec(int node, const double* q, double r2,
                  std::vector<Index>* out) const;

  RowMat refs_;
  std::vector<Index> perm_;
  std::vector<Node> nodes_;
  bool brute_ = false;
};

// Matrix of k-nearest-neighbor distances: row i holds the sorted distances
// from queries.row(i) to the reference set. With exclude_self the two sets
// must be the same point list (row i of queries is ref i and is skipped).
// The i-th bandwidth R-hat is column k-1 of the result.
Mat knn_distances(const SpatialIndex& index, const Mat& queries, int k,
                  bool exclude_self = true);
Mat knn_distances(const Mat& queries, const Mat& refs, int k,
                  bool exclude_self = true);

}  // namespace selftune
