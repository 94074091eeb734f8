#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

namespace selftune {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;
// row-major layout, for point-at-a-time access via raw row pointers
using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A finite sample of points in ambient space. Rows are points. When the data
// came from a synthetic manifold generator, `param` holds the intrinsic
// arclength coordinate t in [0,1) per point; external data may carry integer
// labels instead (e.g. digit classes).
struct PointCloud {
  Mat coords;                    // N x D
  std::optional<Vec> param;      // N, intrinsic t if known
  std::optional<IVec> labels;    // N, class labels if known

  Index size() const { return coords.rows(); }
  Index dim() const { return coords.cols(); }

  void check_consistent() const {
    if (param && param->size() != coords.rows())
      throw std::invalid_argument("PointCloud: param length != point count");
    if (labels && labels->size() != coords.rows())
      throw std::invalid_argument("PointCloud: labels length != point count");
  }
};

}  // namespace selftune
