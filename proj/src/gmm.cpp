#include "psr/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "psr/error.hpp"
#include "psr/random.hpp"

namespace psr::gmm {

namespace {

constexpr double kWeightSumTolerance = 1e-9;
constexpr double kEmptyComponentFraction = 1e-8;
constexpr std::string_view kFormat = "psr-gmm";
constexpr int kVersion = 1;

void check_inputs(std::span<const Vec3> points, std::span<const double> weights) {
    if (points.empty()) throw Error(ErrorCode::EmptySet, "no points given");
    if (points.size() != weights.size()) {
        throw Error(ErrorCode::LengthMismatch, "points and weights differ in length");
    }
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::InvalidArgument, "point weights must be positive and finite");
        }
    }
    for (const auto& x : points) {
        if (!x.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite point");
    }
}

bool all_identical(std::span<const Vec3> points) {
    return std::ranges::all_of(points, [&](const Vec3& x) { return x == points.front(); });
}

Mat3 floor_eigenvalues(const Mat3& sigma, double floor) {
    Eigen::SelfAdjointEigenSolver<Mat3> eig(sigma);
    const Vec3 clipped = eig.eigenvalues().cwiseMax(floor);
    Mat3 out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

struct WeightedMoments {
    Vec3 mean;
    Mat3 covariance;
};

// Moments under weights w_n * r_n (r = responsibilities, or 1).
WeightedMoments moments(std::span<const Vec3> points, std::span<const double> weights,
                        std::span<const double> resp, std::size_t stride, std::size_t c,
                        double mass) {
    Vec3 mean = Vec3::Zero();
    for (std::size_t i = 0; i < points.size(); ++i) {
        mean += (weights[i] * resp[i * stride + c]) * points[i];
    }
    mean /= mass;
    Mat3 cov = Mat3::Zero();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 r = points[i] - mean;
        cov.noalias() += (weights[i] * resp[i * stride + c]) * (r * r.transpose());
    }
    cov /= mass;
    return {mean, 0.5 * (cov + cov.transpose())};
}

// Weighted k-means++: first centre drawn by weight, then by w * D^2.
std::vector<std::size_t> kmeanspp_seeds(std::span<const Vec3> points,
                                        std::span<const double> weights, std::size_t k,
                                        Rng& rng) {
    const std::size_t n = points.size();
    auto draw = [&](std::span<const double> mass) {
        const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
        double target = rng.uniform() * total;
        for (std::size_t i = 0; i < n; ++i) {
            target -= mass[i];
            if (target < 0.0) return i;
        }
        // Rounding can leave target marginally >= 0; pick the last positive.
        for (std::size_t i = n; i-- > 0;) {
            if (mass[i] > 0.0) return i;
        }
        return n - 1;
    };

    std::vector<std::size_t> seeds{draw(weights)};
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<double> mass(n);
    while (seeds.size() < k) {
        const Vec3& last = points[seeds.back()];
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], (points[i] - last).squaredNorm());
            mass[i] = weights[i] * nearest[i];
        }
        const bool spread = std::ranges::any_of(mass, [](double m) { return m > 0.0; });
        seeds.push_back(spread ? draw(mass) : draw(weights));
    }
    return seeds;
}

struct RunOutput {
    std::vector<GaussianComponent> components;
    RestartTrace trace;
};

RunOutput run_em(std::span<const Vec3> points, std::span<const double> weights, std::size_t k,
                 const EmConfig& config, std::uint64_t seed) {
    const std::size_t n = points.size();
    const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
    const std::vector<double> ones(n, 1.0);
    const Mat3 global_cov = moments(points, weights, ones, 1, 0, total_weight).covariance +
                            config.covariance_floor * Mat3::Identity();

    Rng rng(seed);
    std::vector<GaussianComponent> comps(k);
    const auto seeds = kmeanspp_seeds(points, weights, k, rng);
    for (std::size_t c = 0; c < k; ++c) {
        comps[c] = {1.0 / static_cast<double>(k), points[seeds[c]], global_cov};
    }

    RunOutput out;
    out.trace.seed = seed;
    std::vector<ComponentEval> evals(k);
    std::vector<double> log_joint(n * k);
    std::vector<double> log_dens(n);
    std::vector<double> resp(n * k);

    for (int iter = 0;; ++iter) {
        for (std::size_t c = 0; c < k; ++c) evals[c] = make_eval(comps[c]);
        e_step_parallel(points, evals, log_joint, log_dens);
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) ll += weights[i] * log_dens[i];
        out.trace.log_likelihood.push_back(ll);

        const bool after_rescue =
            !out.trace.rescues.empty() && out.trace.rescues.back() == static_cast<std::size_t>(iter);
        if (iter > 0 && !after_rescue) {
            const auto& hist = out.trace.log_likelihood;
            if (hist[hist.size() - 1] - hist[hist.size() - 2] < config.tolerance) {
                out.trace.converged = true;
                break;
            }
        }
        if (iter == config.max_iterations) break;

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) {
                resp[i * k + c] = std::exp(log_joint[i * k + c] - log_dens[i]);
            }
        }

        std::vector<double> mass(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) mass[c] += weights[i] * resp[i * k + c];
        }

        std::vector<std::size_t> used_points;
        bool rescued = false;
        for (std::size_t c = 0; c < k; ++c) {
            if (mass[c] >= kEmptyComponentFraction * total_weight) {
                const auto m = moments(points, weights, resp, k, c, mass[c]);
                comps[c].mean = m.mean;
                comps[c].covariance = floor_eigenvalues(m.covariance, config.covariance_floor);
                continue;
            }
            // Reseed at the worst-explained point not already used.
            std::size_t worst = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (std::ranges::find(used_points, i) != used_points.end()) continue;
                if (worst == n || log_dens[i] < log_dens[worst]) worst = i;
            }
            if (worst == n) worst = 0;
            used_points.push_back(worst);
            comps[c].mean = points[worst];
            comps[c].covariance = global_cov;
            mass[c] = weights[worst];
            rescued = true;
        }
        const double mass_total = std::accumulate(mass.begin(), mass.end(), 0.0);
        for (std::size_t c = 0; c < k; ++c) comps[c].weight = mass[c] / mass_total;
        if (rescued) out.trace.rescues.push_back(static_cast<std::size_t>(iter) + 1);
    }
    out.components = std::move(comps);
    return out;
}

FitResult fit_fixed_k(std::span<const Vec3> points, std::span<const double> weights,
                      std::size_t k, const EmConfig& config) {
    if (points.size() < k) {
        throw Error(ErrorCode::TooFewPoints, "fewer points than mixture components");
    }
    bool degenerate = false;
    if (k > 1 && all_identical(points)) {
        degenerate = true;
        k = 1;
    }

    const auto restarts = static_cast<std::size_t>(config.restarts);
    std::vector<RunOutput> runs(restarts);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(restarts); ++r) {
        runs[r] = run_em(points, weights, k, config,
                         Rng::derive(config.seed, static_cast<std::uint64_t>(r)));
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r) {
        if (runs[r].trace.log_likelihood.back() > runs[best].trace.log_likelihood.back()) best = r;
    }

    std::vector<RestartTrace> traces;
    traces.reserve(restarts);
    for (auto& run : runs) traces.push_back(std::move(run.trace));
    FitResult result{GmmModel(std::move(runs[best].components)),
                     traces[best].log_likelihood.back(), best, std::move(traces), degenerate};
    return result;
}

} // namespace

GmmModel::GmmModel(std::vector<GaussianComponent> components) : components_(std::move(components)) {
    if (components_.empty()) throw Error(ErrorCode::InvalidArgument, "mixture needs a component");
    double sum = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0) || c.weight > 1.0 + kWeightSumTolerance) {
            throw Error(ErrorCode::InvalidArgument, "mixture weight outside (0, 1]");
        }
        if (!c.mean.allFinite() || !c.covariance.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "non-finite component parameters");
        }
        const double asym = (c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff();
        if (asym > 1e-12 * std::max(1.0, c.covariance.cwiseAbs().maxCoeff())) {
            throw Error(ErrorCode::InvalidArgument, "component covariance is not symmetric");
        }
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
        throw Error(ErrorCode::InvalidArgument, "mixture weights do not sum to 1");
    }
    evals_.reserve(components_.size());
    for (const auto& c : components_) evals_.push_back(make_eval(c));
}

void validate(const EmConfig& config) {
    if (config.k && *config.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    if (config.k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 1");
    if (config.max_iterations < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
    }
    if (!(config.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
    if (!(config.covariance_floor > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "covariance floor must be > 0");
    }
    if (config.restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 1");
}

double log_density(const GmmModel& model, const Vec3& x) {
    std::vector<double> terms(model.k());
    for (std::size_t c = 0; c < model.k(); ++c) {
        terms[c] = model.evals()[c].log_weight + log_gaussian(model.evals()[c], x);
    }
    return log_sum_exp(terms);
}

double density(const GmmModel& model, const Vec3& x) { return std::exp(log_density(model, x)); }

std::vector<double> posterior(const GmmModel& model, const Vec3& x) {
    std::vector<double> terms(model.k());
    for (std::size_t c = 0; c < model.k(); ++c) {
        terms[c] = model.evals()[c].log_weight + log_gaussian(model.evals()[c], x);
    }
    const double norm = log_sum_exp(terms);
    for (double& t : terms) t = std::exp(t - norm);
    return terms;
}

std::size_t predict(const GmmModel& model, const Vec3& x) {
    const auto post = posterior(model, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < post.size(); ++c) {
        if (post[c] > post[best]) best = c;
    }
    return best;
}

double log_likelihood(const GmmModel& model, std::span<const Vec3> points,
                      std::span<const double> weights) {
    check_inputs(points, weights);
    std::vector<double> log_joint(points.size() * model.k());
    std::vector<double> log_dens(points.size());
    e_step_parallel(points, model.evals(), log_joint, log_dens);
    double ll = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) ll += weights[i] * log_dens[i];
    return ll;
}

FitResult fit_em(std::span<const Vec3> points, std::span<const double> weights,
                 const EmConfig& config) {
    validate(config);
    check_inputs(points, weights);
    if (!config.k) return select_model(points, weights, config.k_max, config).fit;
    return fit_fixed_k(points, weights, static_cast<std::size_t>(*config.k), config);
}

double bic(double log_likelihood, std::size_t k, double n_eff) {
    const double params = static_cast<double>(10 * k - 1);
    return -2.0 * log_likelihood + params * std::log(n_eff);
}

Selection select_model(std::span<const Vec3> points, std::span<const double> weights, int k_max,
                       const EmConfig& config) {
    validate(config);
    check_inputs(points, weights);
    if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 1");

    const double n_eff = std::accumulate(weights.begin(), weights.end(), 0.0);
    const std::size_t top = std::min(static_cast<std::size_t>(k_max), points.size());
    const std::size_t limit = all_identical(points) ? 1 : top;

    std::optional<Selection> best;
    std::vector<double> scores;
    for (std::size_t k = 1; k <= limit; ++k) {
        FitResult fit = fit_fixed_k(points, weights, k, config);
        const double score = bic(fit.log_likelihood, k, n_eff);
        scores.push_back(score);
        if (!best || score < scores[best->k - 1]) best.emplace(Selection{k, {}, std::move(fit)});
    }
    best->bic = std::move(scores);
    return std::move(*best);
}

std::size_t select_k(std::span<const Vec3> points, std::span<const double> weights, int k_max,
                     const EmConfig& config) {
    return select_model(points, weights, k_max, config).k;
}

std::vector<Vec3> sample(const GmmModel& model, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec3> out;
    out.reserve(n);
    const auto comps = model.components();
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform();
        std::size_t c = 0;
        while (c + 1 < comps.size() && u >= comps[c].weight) {
            u -= comps[c].weight;
            ++c;
        }
        const Vec3 z{rng.normal(), rng.normal(), rng.normal()};
        out.push_back(comps[c].mean + model.evals()[c].chol_lower * z);
    }
    return out;
}

nlohmann::ordered_json to_json(const GmmModel& model) {
    nlohmann::ordered_json comps = nlohmann::ordered_json::array();
    for (const auto& c : model.components()) {
        nlohmann::ordered_json cov = nlohmann::ordered_json::array();
        for (int r = 0; r < 3; ++r) {
            for (int col = 0; col < 3; ++col) cov.push_back(c.covariance(r, col));
        }
        comps.push_back({{"weight", c.weight},
                         {"mean", {c.mean[0], c.mean[1], c.mean[2]}},
                         {"covariance", std::move(cov)}});
    }
    return {{"format", kFormat},
            {"version", kVersion},
            {"k", model.k()},
            {"components", std::move(comps)}};
}

GmmModel model_from_json(const nlohmann::ordered_json& j) {
    try {
        if (j.at("format").get<std::string>() != kFormat) {
            throw Error(ErrorCode::InvalidArgument, "not a psr-gmm record");
        }
        if (j.at("version").get<int>() != kVersion) {
            throw Error(ErrorCode::InvalidArgument, "unsupported psr-gmm version");
        }
        const auto& comps = j.at("components");
        if (comps.size() != j.at("k").get<std::size_t>()) {
            throw Error(ErrorCode::InvalidArgument, "component count does not match k");
        }
        std::vector<GaussianComponent> out;
        for (const auto& c : comps) {
            GaussianComponent g;
            g.weight = c.at("weight").get<double>();
            const auto mean = c.at("mean").get<std::vector<double>>();
            const auto cov = c.at("covariance").get<std::vector<double>>();
            if (mean.size() != 3 || cov.size() != 9) {
                throw Error(ErrorCode::InvalidArgument, "component needs 3 mean and 9 covariance values");
            }
            g.mean = Vec3(mean[0], mean[1], mean[2]);
            for (int r = 0; r < 3; ++r) {
                for (int col = 0; col < 3; ++col) g.covariance(r, col) = cov[r * 3 + col];
            }
            out.push_back(g);
        }
        return GmmModel(std::move(out));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad psr-gmm record: ") + e.what());
    }
}

} // namespace psr::gmm
