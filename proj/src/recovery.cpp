#include "identikit/recovery.hpp"

#include "identikit/parallel.hpp"
#include "identikit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace identikit {

std::string to_string(RecoveryVerdict v) {
    switch (v) {
    case RecoveryVerdict::practically_identifiable: return "practically-identifiable";
    case RecoveryVerdict::marginal: return "marginal";
    case RecoveryVerdict::not_practically_identifiable: return "not-practically-identifiable";
    }
    return "unknown";
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double w = h - static_cast<double>(lo);
    if (w == 0.0 || values[hi] == values[lo]) return values[lo];
    return values[lo] + w * (values[hi] - values[lo]);
}

namespace {

std::vector<double> errors_against(const ParameterVector& truth, const ParameterVector& estimate,
                                   const RecoveryOptions& options) {
    std::vector<double> err(static_cast<std::size_t>(truth.size()));
    for (Eigen::Index j = 0; j < truth.size(); ++j) {
        const double diff = std::abs(estimate[j] - truth[j]);
        err[static_cast<std::size_t>(j)] =
            std::abs(truth[j]) < options.small_value ? diff : diff / std::abs(truth[j]);
    }
    return err;
}

bool within(const ParameterVector& truth, const std::vector<double>& err, const std::vector<int>& free,
            const RecoveryOptions& options) {
    for (int j : free) {
        const double tol = std::abs(truth[j]) < options.small_value ? options.absolute_tolerance
                                                                     : options.relative_tolerance;
        if (!(err[static_cast<std::size_t>(j)] <= tol)) return false;
    }
    return true;
}

} // namespace

RecoveryTrial recover_once(const Model& model, const Design& design, const ParameterVector& truth,
                           std::uint64_t seed, const RecoveryOptions& options) {
    model.space().require(truth);
    RecoveryTrial trial;
    trial.truth = truth;
    trial.seed = seed;

    const Dataset data = generate_data(model, design, truth, seed);
    MultiStartOptions ms;
    ms.starts = options.starts;
    ms.seed = mix64(seed ^ 0x57a27ULL);
    ms.threads = 1;
    ms.fit = options.fit;
    const MultiStartResult result = multi_start_fit(model, data, ms);

    const EstimateResult& best = result.best();
    trial.estimate = best.theta;
    trial.objective = best.objective;
    trial.fitted = !best.failed && std::isfinite(best.objective);
    trial.relative_error = errors_against(truth, best.theta, options);
    if (!trial.fitted) {
        std::fill(trial.relative_error.begin(), trial.relative_error.end(),
                  std::numeric_limits<double>::infinity());
        return trial;
    }

    const int p = model.dimension();
    const ParameterMask mask = options.fit.mask.dimension() ? options.fit.mask : ParameterMask(p);
    const std::vector<int> free = mask.free_indices();
    trial.success = within(truth, trial.relative_error, free, options);
    trial.symmetry_success = trial.success;
    for (const auto& symmetry : model.symmetries()) {
        if (trial.symmetry_success) break;
        const ParameterVector image = symmetry.nearest_image(truth, best.theta);
        trial.symmetry_success = within(image, errors_against(image, best.theta, options), free, options);
    }
    return trial;
}

RecoveryReport global_recovery(const Model& model, const Design& design, int trials,
                               const std::optional<Prior>& prior, std::uint64_t seed,
                               const RecoveryOptions& options) {
    if (trials < 1) throw PreconditionError("recover.k_trials must be at least 1");
    design.validate();
    const Prior pi = prior ? *prior : Prior::uniform_over(model.space());
    pi.validate(model.space());
    const int p = model.dimension();

    RecoveryReport report;
    report.design = design;
    report.seed = seed;
    report.trials.resize(static_cast<std::size_t>(trials));

    const CounterRng base(seed, 0x2ec0);
    parallel_for(static_cast<std::size_t>(trials), options.threads, [&](std::size_t k) {
        const CounterRng rng = base.split(k);
        ParameterVector truth(p);
        std::uint64_t counter = 0;
        for (int attempt = 0;; ++attempt) {
            if (attempt > 10000) throw PreconditionError("cannot draw a feasible θ* from the prior");
            for (int j = 0; j < p; ++j) truth[j] = pi[j].transform(rng.uniform(counter++));
            if (model.space().contains(truth)) break;
        }
        report.trials[k] = recover_once(model, design, truth, rng.bits(1ULL << 40), options);
    });

    double ok = 0.0, sym_ok = 0.0;
    for (const auto& t : report.trials) {
        ok += t.success ? 1.0 : 0.0;
        sym_ok += t.symmetry_success ? 1.0 : 0.0;
    }
    report.success_rate = ok / trials;
    report.symmetry_success_rate = sym_ok / trials;
    for (int j = 0; j < p; ++j) {
        std::vector<double> errs;
        for (const auto& t : report.trials) errs.push_back(t.relative_error[static_cast<std::size_t>(j)]);
        report.error_quantiles.push_back({quantile(errs, 0.5), quantile(errs, 0.9), quantile(errs, 1.0)});
    }
    if (report.success_rate >= options.identifiable_rate) {
        report.verdict = RecoveryVerdict::practically_identifiable;
    } else if (report.success_rate >= options.marginal_rate) {
        report.verdict = RecoveryVerdict::marginal;
    } else {
        report.verdict = RecoveryVerdict::not_practically_identifiable;
    }
    return report;
}

} // namespace identikit
