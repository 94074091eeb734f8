#pragma once

#include <optional>
#include <vector>

#include "selftune/bandwidth.hpp"
#include "selftune/types.hpp"

namespace selftune {

// Affinity families built from the Gaussian profile k0(r) = exp(-r):
//
//   selftuned_alpha  W_ij = k0(||xi-xj||^2 / (eps rho_i rho_j)) / (rho_i rho_j)^alpha
//                    (or with sigma0^2 R_i R_j in place of eps rho_i rho_j)
//   fixed_beta       W_ij = k0(||xi-xj||^2 / eps) / (p_i p_j)^beta
//   mixed_rho_p      selftuned alpha=1 entries divided by sqrt(p_i p_j)
//   mnist_w1         k0(||xi-xj||^2 / (sigma0^2 R_i R_j)) / (sigma0^2 R_i R_j)
//   mnist_wprime     mnist_w1 divided by sqrt(mu_i mu_j)

enum class KernelVariant {
  selftuned_alpha,
  fixed_beta,
  mixed_rho_p,
  mnist_w1,
  mnist_wprime,
};

KernelVariant kernel_variant_from_name(const std::string& name);
std::string kernel_variant_name(KernelVariant v);

struct KernelSpec {
  KernelVariant variant = KernelVariant::selftuned_alpha;
  std::optional<double> eps;     // eps-form: bandwidth^2 = eps rho_i rho_j
  std::optional<double> sigma0;  // sigma0-form: bandwidth^2 = sigma0^2 R_i R_j
  double alpha = 1.0;
  double beta = 0.5;
  double truncation_tol = 1e-12;  // drop entries < tol * max entry; 0 = dense
};

// Symmetric sparse affinity in CSR form. Each unordered pair is evaluated
// once and stored in both triangles; the diagonal is always evaluated.
struct AffinityMatrix {
  Index n = 0;
  std::vector<Index> row_ptr;  // size n+1
  std::vector<Index> col;
  std::vector<double> val;
  KernelSpec spec;

  Index nnz() const { return static_cast<Index>(val.size()); }
  double entry(Index i, Index j) const;  // 0 when not stored
  Vec degree() const;                    // row sums, diagonal included
  Vec offdiag_degree() const;            // row sums without the diagonal
  Vec matvec(const Vec& f) const;

  // stored upper triangle (i <= j) as coordinate triplets
  std::vector<std::tuple<Index, Index, double>> upper_triplets() const;
};

// points: N x D sample; bw: bandwidths at those points (R-hat and rho_hat).
// The spec must carry eps (requires rho_hat) or sigma0 (uses R-hat).
AffinityMatrix build_selftuned(const Mat& points, const BandwidthField& bw,
                               const KernelSpec& spec);

// fixed-bandwidth density-normalized family; p_hat strictly positive when
// beta != 0
AffinityMatrix build_fixed(const Mat& points, const Vec& p_hat,
                           const KernelSpec& spec);

// self-tuned alpha=1 entries with the extra 1/sqrt(p_hat_i p_hat_j) factor;
// targets the Laplace-Beltrami operator without knowing d
AffinityMatrix build_mixed(const Mat& points, const BandwidthField& bw,
                           const Vec& p_hat, const KernelSpec& spec);

struct MnistKernels {
  AffinityMatrix w1;      // density-biased variant
  AffinityMatrix wprime;  // mu-hat-corrected variant
};

// sigma0-form pair used for ambient high-dimensional data; mu_hat is the
// un-normalized density estimate at the points
MnistKernels build_mnist_variants(const Mat& points, const BandwidthField& bw,
                                  const Vec& mu_hat, const KernelSpec& spec);

}  // namespace selftune
