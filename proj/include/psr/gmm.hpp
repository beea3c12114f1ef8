#pragma once

// Gaussian mixture models over 3-D VAD space: evaluation, posterior
// inference, weighted EM fitting with restarts, BIC model selection and
// sampling.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "psr/gmm_kernels.hpp"
#include "psr/vad.hpp"

namespace psr::gmm {

// Immutable, validated mixture. Construction checks that there is at
// least one component, that the weights are positive and sum to 1 within
// 1e-9, and that every covariance is symmetric positive definite.
class GmmModel {
public:
    explicit GmmModel(std::vector<GaussianComponent> components);

    std::size_t k() const noexcept { return components_.size(); }
    std::span<const GaussianComponent> components() const noexcept { return components_; }
    std::span<const ComponentEval> evals() const noexcept { return evals_; }

private:
    std::vector<GaussianComponent> components_;
    std::vector<ComponentEval> evals_;
};

struct EmConfig {
    std::optional<int> k;  // nullopt selects K by BIC up to k_max
    int k_max = 3;
    int max_iterations = 200;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
    double covariance_floor = 1e-6;
    int restarts = 4;
};

// Throws Error{InvalidArgument} for out-of-range settings.
void validate(const EmConfig& config);

double density(const GmmModel& model, const Vec3& x);
double log_density(const GmmModel& model, const Vec3& x);
std::vector<double> posterior(const GmmModel& model, const Vec3& x);
// Argmax of the posterior; ties go to the lowest index.
std::size_t predict(const GmmModel& model, const Vec3& x);

// sum_n w_n log p(x_n). Throws EmptySet / LengthMismatch.
double log_likelihood(const GmmModel& model, std::span<const Vec3> points,
                      std::span<const double> weights);

struct RestartTrace {
    std::uint64_t seed = 0;
    // Log-likelihood after initialisation and after every M-step.
    std::vector<double> log_likelihood;
    // Iterations (indices into log_likelihood) whose parameters came out
    // of an empty-component rescue rather than a plain M-step.
    std::vector<std::size_t> rescues;
    bool converged = false;
};

struct FitResult {
    GmmModel model;
    double log_likelihood = 0.0;
    std::size_t best_restart = 0;
    std::vector<RestartTrace> restarts;
    // All points coincide but K > 1 was requested; a K=1 model was fitted.
    bool degenerate = false;
};

// Weighted EM with k-means++ seeding, a covariance eigenvalue floor and
// `restarts` independent seeded runs; the best log-likelihood wins (ties
// to the lower restart index). With config.k unset, K is chosen by BIC.
// Throws TooFewPoints, EmptySet, LengthMismatch, InvalidArgument.
FitResult fit_em(std::span<const Vec3> points, std::span<const double> weights,
                 const EmConfig& config);

// BIC = -2 logL + p log(n_eff), p = (K-1) + 3K + 6K, n_eff = sum of weights.
double bic(double log_likelihood, std::size_t k, double n_eff);

struct Selection {
    std::size_t k;
    std::vector<double> bic;  // bic[i] is for K = i + 1
    FitResult fit;            // fit for the chosen K
};

// Fits K = 1..min(k_max, n) and keeps the lowest BIC (ties to lower K).
Selection select_model(std::span<const Vec3> points, std::span<const double> weights, int k_max,
                       const EmConfig& config);

std::size_t select_k(std::span<const Vec3> points, std::span<const double> weights, int k_max,
                     const EmConfig& config);

std::vector<Vec3> sample(const GmmModel& model, std::size_t n, std::uint64_t seed);

// Versioned, self-describing record:
// {"format":"psr-gmm","version":1,"k":K,"components":[{"weight","mean"[3],"covariance"[9]}]}
nlohmann::ordered_json to_json(const GmmModel& model);
GmmModel model_from_json(const nlohmann::ordered_json& j);

} // namespace psr::gmm
