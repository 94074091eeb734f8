#include "selftune/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace selftune {

namespace {

constexpr Index kLeafSize = 16;
constexpr int kBruteForceDim = 17;  // kd-tree handles dim <= 16

// shared by both query paths; fixed accumulation order keeps them bit-equal
inline double sq_dist(const double* a, const double* b, int d) {
  double acc = 0.0;
  for (int c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    acc += diff * diff;
  }
  return acc;
}

struct HeapCmp {
  bool operator()(const std::pair<double, Index>& a,
                  const std::pair<double, Index>& b) const {
    return a.first < b.first ||
           (a.first == b.first && a.second < b.second);
  }
};

}  // namespace

SpatialIndex::SpatialIndex(Mat refs) : refs_(refs) {
  if (refs_.rows() < 1) throw std::invalid_argument("SpatialIndex: empty refs");
  brute_ = refs_.cols() >= kBruteForceDim;
  if (brute_) return;

  perm_.resize(refs_.rows());
  for (Index i = 0; i < refs_.rows(); ++i) perm_[i] = i;
  nodes_.reserve(2 * (refs_.rows() / kLeafSize + 2));
  build_node(0, refs_.rows());
}

int SpatialIndex::build_node(Index begin, Index end) {
  const int d = dim();
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  {
    Node& n = nodes_[id];
    n.begin = begin;
    n.end = end;
    n.lo.assign(d, std::numeric_limits<double>::infinity());
    n.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (Index i = begin; i < end; ++i) {
      const double* p = refs_.row(perm_[i]).data();
      for (int c = 0; c < d; ++c) {
        n.lo[c] = std::min(n.lo[c], p[c]);
        n.hi[c] = std::max(n.hi[c], p[c]);
      }
    }
  }
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  double spread = -1.0;
  for (int c = 0; c < d; ++c) {
    const double s = nodes_[id].hi[c] - nodes_[id].lo[c];
    if (s > spread) {
      spread = s;
      axis = c;
    }
  }
  if (spread <= 0.0) return id;  // all points identical: keep as leaf

  const Index mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid,
                   perm_.begin() + end, [&](Index a, Index b) {
                     return refs_(a, axis) < refs_(b, axis);
                   });
  // children may reallocate nodes_, so assign links afterwards
  const int left = build_node(begin, mid);
  const int right = build_node(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double SpatialIndex::box_dist2(const Node& n, const double* q) const {
  double acc = 0.0;
  for (int c = 0; c < dim(); ++c) {
    double excess = 0.0;
    if (q[c] < n.lo[c])
      excess = n.lo[c] - q[c];
    else if (q[c] > n.hi[c])
      excess = q[c] - n.hi[c];
    acc += excess * excess;
  }
  return acc;
}

void SpatialIndex::knn_rec(int node, const double* q, int k, Index exclude_idx,
                           std::vector<std::pair<double, Index>>* heap) const {
  const Node& n = nodes_[node];
  if (static_cast<int>(heap->size()) == k &&
      box_dist2(n, q) >= heap->front().first)
    return;

  if (n.left < 0) {
    for (Index i = n.begin; i < n.end; ++i) {
      const Index j = perm_[i];
      if (j == exclude_idx) continue;
      const double d2 = sq_dist(q, refs_.row(j).data(), dim());
      if (static_cast<int>(heap->size()) < k) {
        heap->emplace_back(d2, j);
        std::push_heap(heap->begin(), heap->end(), HeapCmp{});
      } else if (HeapCmp{}(std::make_pair(d2, j), heap->front())) {
        std::pop_heap(heap->begin(), heap->end(), HeapCmp{});
        heap->back() = {d2, j};
        std::push_heap(heap->begin(), heap->end(), HeapCmp{});
      }
    }
    return;
  }

  const double dl = box_dist2(nodes_[n.left], q);
  const double dr = box_dist2(nodes_[n.right], q);
  if (dl <= dr) {
    knn_rec(n.left, q, k, exclude_idx, heap);
    knn_rec(n.right, q, k, exclude_idx, heap);
  } else {
    knn_rec(n.right, q, k, exclude_idx, heap);
    knn_rec(n.left, q, k, exclude_idx, heap);
  }
}

void SpatialIndex::knn(const double* q, int k, Index exclude_idx,
                       std::vector<double>* dist,
                       std::vector<Index>* idx) const {
  const Index avail = size() - (exclude_idx >= 0 ? 1 : 0);
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (k > avail)
    throw std::invalid_argument("knn: k exceeds available reference count");

  std::vector<std::pair<double, Index>> best;
  best.reserve(k);
  if (brute_) {
    for (Index j = 0; j < size(); ++j) {
      if (j == exclude_idx) continue;
      const double d2 = sq_dist(q, refs_.row(j).data(), dim());
      if (static_cast<int>(best.size()) < k) {
        best.emplace_back(d2, j);
        std::push_heap(best.begin(), best.end(), HeapCmp{});
      } else if (HeapCmp{}(std::make_pair(d2, j), best.front())) {
        std::pop_heap(best.begin(), best.end(), HeapCmp{});
        best.back() = {d2, j};
        std::push_heap(best.begin(), best.end(), HeapCmp{});
      }
    }
  } else {
    knn_rec(0, q, k, exclude_idx, &best);
  }

  std::sort(best.begin(), best.end(), HeapCmp{});
  if (dist) {
    dist->resize(k);
    for (int i = 0; i < k; ++i) (*dist)[i] = std::sqrt(best[i].first);
  }
  if (idx) {
    idx->resize(k);
    for (int i = 0; i < k; ++i) (*idx)[i] = best[i].second;
  }
}

void SpatialIndex::radius_rec(int node, const double* q, double r2,
                              std::vector<Index>* out) const {
  const Node& n = nodes_[node];
  if (box_dist2(n, q) > r2) return;
  if (n.left < 0) {
    for (Index i = n.begin; i < n.end; ++i) {
      const Index j = perm_[i];
      if (sq_dist(q, refs_.row(j).data(), dim()) <= r2) out->push_back(j);
    }
    return;
  }
  radius_rec(n.left, q, r2, out);
  radius_rec(n.right, q, r2, out);
}

void SpatialIndex::radius(const double* q, double r,
                          std::vector<Index>* out) const {
  out->clear();
  if (r < 0.0) return;
  const double r2 = r * r;
  if (brute_) {
    for (Index j = 0; j < size(); ++j)
      if (sq_dist(q, refs_.row(j).data(), dim()) <= r2) out->push_back(j);
    return;
  }
  radius_rec(0, q, r2, out);
  std::sort(out->begin(), out->end());
}

Mat knn_distances(const SpatialIndex& index, const Mat& queries, int k,
                  bool exclude_self) {
  if (queries.cols() != index.dim())
    throw std::invalid_argument("knn_distances: dimension mismatch");
  if (exclude_self && queries.rows() != index.size())
    throw std::invalid_argument(
        "knn_distances: exclude_self requires queries == refs");

  Mat out(queries.rows(), k);
  std::vector<double> dist;
  Eigen::RowVectorXd q(queries.cols());
  for (Index i = 0; i < queries.rows(); ++i) {
    q = queries.row(i);  // contiguous copy for raw pointer access
    index.knn(q.data(), k, exclude_self ? i : Index(-1), &dist, nullptr);
    for (int c = 0; c < k; ++c) out(i, c) = dist[c];
  }
  return out;
}

Mat knn_distances(const Mat& queries, const Mat& refs, int k,
                  bool exclude_self) {
  SpatialIndex index(refs);
  return knn_distances(index, queries, k, exclude_self);
}

}  // namespace selftune
