#pragma once

// Per-point E-step kernels. The OpenMP kernel evaluates Gaussians through
// a cached Cholesky factor; the serial reference evaluates the textbook
// formula with an explicit inverse and determinant and is kept for
// testing and benchmarking only.
//
// Both kernels are pure maps over points (each output slot is written by
// exactly one iteration), so results never depend on the thread count.

#include <cstddef>
#include <span>

#include "psr/vad.hpp"

namespace psr::gmm {

struct GaussianComponent {
    double weight = 1.0;  // pi_c
    Vec3 mean = Vec3::Zero();
    Mat3 covariance = Mat3::Identity();
};

// Cached evaluation data for one weighted component.
struct ComponentEval {
    Vec3 mean;
    Mat3 chol_lower;   // covariance = L L^T
    double log_weight; // log pi
    double log_norm;   // -1.5 log(2 pi) - 0.5 log det(covariance)
};

// Throws Error{InvalidArgument} if the covariance is not positive definite.
ComponentEval make_eval(const GaussianComponent& c);

// log N(x | mean, cov) for one component (no mixture weight).
double log_gaussian(const ComponentEval& c, const Vec3& x) noexcept;

double log_sum_exp(std::span<const double> values) noexcept;

// For each point n and component c:
//   log_joint[n*K + c] = log pi_c + log N(x_n | mu_c, Sigma_c)
//   log_density[n]     = log sum_c exp(log_joint[n*K + c])
// log_joint must have size n*K, log_density size n.
void e_step_parallel(std::span<const Vec3> points, std::span<const ComponentEval> comps,
                     std::span<double> log_joint, std::span<double> log_density);

void e_step_serial_reference(std::span<const Vec3> points,
                             std::span<const GaussianComponent> comps,
                             std::span<double> log_joint, std::span<double> log_density);

} // namespace psr::gmm
