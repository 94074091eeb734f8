#pragma once

#include <functional>

namespace selftune {

// Moment constants of radial kernel profiles h acting on the squared radius:
//   m0[h] = int_{R^d} h(|u|^2) du
//   m2[h] = (1/d) int_{R^d} |u|^2 h(|u|^2) du
// These relate discrete kernel sums to their continuum limits.

double unit_ball_volume(int d);  // m0 of the indicator profile 1_[0,1)

double gaussian_m0(int d);  // pi^(d/2)      for k0(r) = exp(-r)
double gaussian_m2(int d);  // pi^(d/2) / 2

double kde_m0(int d);  // 2^d for the density profile h(r) = exp(-pi r / 4)

// numeric moments by 64-node generalized Gauss-Laguerre quadrature in the
// squared radius; exact for the shipped profiles, used to cross-check the
// analytic constants and to admit user-supplied profiles
double kernel_m0(const std::function<double(double)>& h, int d);
double kernel_m2(const std::function<double(double)>& h, int d);

}  // namespace selftune
