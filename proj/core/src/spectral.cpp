#include "selftune/spectral.hpp"

#include <cmath>
#include <limits>

#include "selftune/rng.hpp"

namespace selftune {

// QL with implicit shifts on a symmetric tridiagonal matrix (EISPACK tql2
// lineage). Eigenvalues ascend on return; z accumulates the rotations.
void tridiag_eig(Vec& d, Vec& e, Mat* z) {
  const Index n = d.size();
  if (n == 0) return;
  if (e.size() < n - 1)
    throw std::invalid_argument("tridiag_eig: subdiagonal too short");
  if (z && (z->rows() < 1 || z->cols() != n))
    throw std::invalid_argument("tridiag_eig: basis has wrong column count");

  std::vector<double> ee(n, 0.0);
  for (Index i = 0; i + 1 < n; ++i) ee[i] = e[i];

  const double eps = std::numeric_limits<double>::epsilon();
  double f = 0.0;
  double tst1 = 0.0;
  for (Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(ee[l]));
    Index m = l;
    while (m < n && std::abs(ee[m]) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 80)
          throw std::runtime_error("tridiag_eig: QL failed to converge");

        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * ee[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0.0) r = -r;
        d[l] = ee[l] / (p + r);
        d[l + 1] = ee[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (Index i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = ee[l + 1];
        double s = 0.0, s2 = 0.0;
        for (Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * ee[i];
          h = c * p;
          r = std::hypot(p, ee[i]);
          ee[i + 1] = s * r;
          s = ee[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);

          if (z) {
            for (Index k = 0; k < z->rows(); ++k) {
              h = (*z)(k, i + 1);
              (*z)(k, i + 1) = s * (*z)(k, i) + c * h;
              (*z)(k, i) = c * (*z)(k, i) - s * h;
            }
          }
          if (i == l) break;  // Index may be unsigned-unsafe at -1
        }
        p = -s * s2 * c3 * el1 * ee[l] / dl1;
        ee[l] = s * p;
        d[l] = c * p;
      } while (std::abs(ee[l]) > eps * tst1);
    }
    d[l] += f;
    ee[l] = 0.0;
  }

  // ascending order, columns permuted alongside
  for (Index i = 0; i + 1 < n; ++i) {
    Index k = i;
    for (Index j = i + 1; j < n; ++j)
      if (d[j] < d[k]) k = j;
    if (k != i) {
      std::swap(d[i], d[k]);
      if (z) z->col(i).swap(z->col(k));
    }
  }
}

namespace {

// shifted similarity-transformed operator
//   y = shift * x - B^(-1/2) (D - W) B^(-1/2) x
// whose largest eigenvalues are the sought bottom of the pencil (D-W, B)
struct ShiftedOp {
  const AffinityMatrix& W;
  const Vec& deg;
  const Vec& binv_sqrt;
  double shift;

  Vec apply(const Vec& x) const {
    Vec u = binv_sqrt.cwiseProduct(x);
    Vec y = deg.cwiseProduct(u) - W.matvec(u);
    return shift * x - binv_sqrt.cwiseProduct(y).eval();
  }
};

double gershgorin_bound(const AffinityMatrix& W, const Vec& deg,
                        const Vec& binv_sqrt) {
  double bound = 0.0;
  for (Index i = 0; i < W.n; ++i) {
    double row = 0.0;
    for (Index p = W.row_ptr[i]; p < W.row_ptr[i + 1]; ++p) {
      const Index j = W.col[p];
      if (j == i) continue;
      row += std::abs(W.val[p]) * binv_sqrt[i] * binv_sqrt[j];
    }
    row += (deg[i] - W.entry(i, i)) * binv_sqrt[i] * binv_sqrt[i];
    bound = std::max(bound, row);
  }
  return bound;
}

void orthogonalize(const Mat& V, Index cols, Vec* w) {
  // classical Gram-Schmidt, applied twice by the callers for stability
  Vec proj = V.leftCols(cols).transpose() * (*w);
  *w -= V.leftCols(cols) * proj;
}

SpectralResult lanczos_bottom(const AffinityMatrix& W, const Vec& b_diag,
                              EigProblem prob, int m, const EigOptions& opts) {
  const Index n = W.n;
  if (m < 1 || m > n)
    throw std::invalid_argument("eig: need 1 <= m <= N");
  for (Index i = 0; i < n; ++i)
    if (!(b_diag[i] > 0.0))
      throw std::runtime_error("eig: metric diagonal must be positive");

  const Vec deg = W.degree();
  Vec binv_sqrt(n);
  for (Index i = 0; i < n; ++i) binv_sqrt[i] = 1.0 / std::sqrt(b_diag[i]);

  const double shift = gershgorin_bound(W, deg, binv_sqrt);
  const double scale = std::max(shift, 1.0);
  const ShiftedOp op{W, deg, binv_sqrt, shift};

  const Index cap =
      (opts.max_iter > 0) ? std::min<Index>(opts.max_iter, n) : n;
  Index target = std::min<Index>(cap, std::max<Index>(2 * m + 30, 60));

  Rng rng(opts.seed);
  auto random_unit = [&](Index dim) {
    Vec v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = rng.normal();
    return v;
  };

  Mat V(n, target);
  std::vector<double> alpha, beta;  // beta[j]: coupling between j-1 and j
  alpha.reserve(cap);
  beta.reserve(cap);

  {
    Vec v0 = random_unit(n);
    v0 /= v0.norm();
    V.col(0) = v0;
  }
  beta.push_back(0.0);

  const double breakdown = 1e-12 * scale;
  Index K = 0;            // columns with completed alpha
  double beta_next = 0.0;  // coupling to the (K+1)-th basis vector

  Vec ritz_vals;
  Mat ritz_vecs;

  while (true) {
    // extend the factorization to `target` columns
    while (K < target) {
      const Vec& v = V.col(K);
      Vec w = op.apply(v);
      const double a = v.dot(w);
      alpha.push_back(a);
      w -= a * v;
      if (K > 0) w -= beta[K] * V.col(K - 1);
      orthogonalize(V, K + 1, &w);
      orthogonalize(V, K + 1, &w);
      beta_next = w.norm();
      ++K;
      if (K == cap) break;

      if (beta_next <= breakdown) {
        // invariant subspace found; continue in its orthogonal complement
        double nrm = 0.0;
        for (int tries = 0; tries < 64; ++tries) {
          w = random_unit(n);
          orthogonalize(V, K, &w);
          orthogonalize(V, K, &w);
          nrm = w.norm();
          if (nrm > 1e-6 * std::sqrt(static_cast<double>(n))) break;
        }
        if (!(nrm > 0.0))
          throw std::runtime_error("eig: basis restart failed");
        beta_next = 0.0;
        w /= nrm;
      } else {
        w /= beta_next;
      }
      if (K == V.cols()) V.conservativeResize(Eigen::NoChange, std::min(cap, 2 * K));
      V.col(K) = w;
      beta.push_back(beta_next);
    }

    // Ritz values plus last-row eigenvector components: enough for the
    // residual bound |beta_next * S(K-1, ...)| without the O(K^3) vectors
    Vec td(K), te(K);
    for (Index i = 0; i < K; ++i) {
      td[i] = alpha[i];
      te[i] = (i + 1 < K) ? beta[i + 1] : 0.0;
    }
    Mat last_row = Mat::Zero(1, K);
    last_row(0, K - 1) = 1.0;
    tridiag_eig(td, te, &last_row);

    bool converged = true;
    for (int i = 0; i < m; ++i) {
      const double res = std::abs(beta_next * last_row(0, K - 1 - i));
      if (res > opts.tol * scale) {
        converged = false;
        break;
      }
    }
    if (converged || K == cap) {
      Vec td2(K), te2(K);
      for (Index i = 0; i < K; ++i) {
        td2[i] = alpha[i];
        te2[i] = (i + 1 < K) ? beta[i + 1] : 0.0;
      }
      Mat S = Mat::Identity(K, K);
      tridiag_eig(td2, te2, &S);
      ritz_vals = td2;
      ritz_vecs = S;
      break;
    }
    target = std::min(cap, 2 * K);
  }

  SpectralResult out;
  out.problem = prob;
  out.eigenvalues.resize(m);
  out.eigenvectors.resize(n, m);
  out.residuals.resize(m);
  const Index K_final = ritz_vals.size();
  for (int i = 0; i < m; ++i) {
    const Index pick = K_final - 1 - i;
    out.eigenvalues[i] = shift - ritz_vals[pick];
    Vec u = V.leftCols(K_final) * ritz_vecs.col(pick);
    u /= u.norm();
    Vec v = binv_sqrt.cwiseProduct(u);

    // sign: largest-magnitude entry positive
    Index imax = 0;
    double amax = -1.0;
    for (Index r = 0; r < n; ++r) {
      const double av = std::abs(v[r]);
      if (av > amax) {
        amax = av;
        imax = r;
      }
    }
    if (v[imax] < 0.0) v = -v;

    const double lambda = out.eigenvalues[i];
    Vec resid = deg.cwiseProduct(v) - W.matvec(v) -
                lambda * b_diag.cwiseProduct(v).eval();
    out.residuals[i] = resid.norm();
    out.eigenvectors.col(i) = v;
  }
  return out;
}

}  // namespace

SpectralResult eig_unnormalized(const AffinityMatrix& W, int m,
                                const EigOptions& opts) {
  return lanczos_bottom(W, Vec::Ones(W.n), EigProblem::unnormalized, m, opts);
}

SpectralResult eig_rw_prime(const AffinityMatrix& W, const Vec& scale, int m,
                            const EigOptions& opts) {
  if (scale.size() != W.n)
    throw std::invalid_argument("eig_rw_prime: scale size mismatch");
  const Vec deg = W.degree();
  Vec b(W.n);
  for (Index i = 0; i < W.n; ++i) b[i] = deg[i] * scale[i] * scale[i];
  return lanczos_bottom(W, b, EigProblem::rw_prime, m, opts);
}

}  // namespace selftune
