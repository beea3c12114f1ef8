#include "psr/gmm_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "psr/error.hpp"

namespace psr::gmm {

namespace {
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
}

ComponentEval make_eval(const GaussianComponent& c) {
    Eigen::LLT<Mat3> llt(c.covariance);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::InvalidArgument, "component covariance is not positive definite");
    }
    const Mat3 lower = llt.matrixL();
    double half_log_det = 0.0;
    for (int i = 0; i < 3; ++i) half_log_det += std::log(lower(i, i));
    if (!std::isfinite(half_log_det)) {
        throw Error(ErrorCode::InvalidArgument, "component covariance is not positive definite");
    }
    const double log_norm = -1.5 * kLog2Pi - half_log_det;
    return {c.mean, lower, std::log(c.weight), log_norm};
}

double log_gaussian(const ComponentEval& c, const Vec3& x) noexcept {
    // Forward substitution L y = x - mu, unrolled for 3x3.
    const Mat3& L = c.chol_lower;
    const Vec3 r = x - c.mean;
    const double y0 = r[0] / L(0, 0);
    const double y1 = (r[1] - L(1, 0) * y0) / L(1, 1);
    const double y2 = (r[2] - L(2, 0) * y0 - L(2, 1) * y1) / L(2, 2);
    return c.log_norm - 0.5 * (y0 * y0 + y1 * y1 + y2 * y2);
}

double log_sum_exp(std::span<const double> values) noexcept {
    if (values.empty()) return -INFINITY;
    const double top = *std::ranges::max_element(values);
    if (!std::isfinite(top)) return top;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - top);
    return top + std::log(sum);
}

void e_step_parallel(std::span<const Vec3> points, std::span<const ComponentEval> comps,
                     std::span<double> log_joint, std::span<double> log_density) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(points.size());
    const std::size_t k = comps.size();

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto row = log_joint.subspan(static_cast<std::size_t>(i) * k, k);
        for (std::size_t c = 0; c < k; ++c) {
            row[c] = comps[c].log_weight + log_gaussian(comps[c], points[i]);
        }
        log_density[i] = log_sum_exp(row);
    }
}

void e_step_serial_reference(std::span<const Vec3> points,
                             std::span<const GaussianComponent> comps,
                             std::span<double> log_joint, std::span<double> log_density) {
    const std::size_t k = comps.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            const Vec3 r = points[i] - comps[c].mean;
            const double mahalanobis = r.dot(comps[c].covariance.inverse() * r);
            const double log_det = std::log(comps[c].covariance.determinant());
            log_joint[i * k + c] =
                std::log(comps[c].weight) - 0.5 * (3.0 * kLog2Pi + log_det + mahalanobis);
        }
        log_density[i] = log_sum_exp(log_joint.subspan(i * k, k));
    }
}

} // namespace psr::gmm
