#pragma once

#include <cstdint>

#include "selftune/kernels.hpp"

namespace selftune {

enum class EigProblem { unnormalized, rw_prime };

// Bottom eigenpairs of the graph Laplacian. Eigenvalues ascend;
// eigenvectors are columns, B-orthonormal for the generalized problem
// (B = I for the unnormalized one). Sign convention: the entry of largest
// magnitude in each vector is positive. residuals holds
// ||(D-W)v - lambda B v||_2 per pair.
struct SpectralResult {
  Vec eigenvalues;
  Mat eigenvectors;  // N x m
  EigProblem problem = EigProblem::unnormalized;
  Vec residuals;
};

struct EigOptions {
  double tol = 1e-11;        // residual tolerance relative to operator scale
  int max_iter = 0;          // Krylov cap; 0 picks automatically (up to N)
  std::uint64_t seed = 1234;  // start-vector seed
};

// eig of D - W (symmetric positive semidefinite)
SpectralResult eig_unnormalized(const AffinityMatrix& W, int m,
                                const EigOptions& opts = {});

// generalized eig of (D - W, B) with B = D * diag(scale)^2; scale is the
// per-point bandwidth entering the rw' operator (R-hat or rho-hat — the
// choice rescales eigenvalues but not eigenvectors)
SpectralResult eig_rw_prime(const AffinityMatrix& W, const Vec& scale, int m,
                            const EigOptions& opts = {});

// Symmetric tridiagonal eigensolve by QL with implicit shifts. diag holds
// the diagonal on input and the ascending eigenvalues on output; off is the
// subdiagonal (off[0..n-2], destroyed). When z is non-null it must hold
// a basis (typically identity); its columns become the eigenvectors in the
// same order.
void tridiag_eig(Vec& diag, Vec& off, Mat* z);

}  // namespace selftune
