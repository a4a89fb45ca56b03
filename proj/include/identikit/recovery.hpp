#pragma once

#include "identikit/estimation.hpp"
#include "identikit/sobol.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace identikit {

struct RecoveryOptions {
    int starts = 16;
    double relative_tolerance = 0.1;
    double absolute_tolerance = 1e-3; // used when |θ*_j| < small_value
    double small_value = 1e-6;
    double identifiable_rate = 0.95;
    double marginal_rate = 0.8;
    FitOptions fit;
    std::size_t threads = 1;
};

struct RecoveryTrial {
    ParameterVector truth;
    std::uint64_t seed = 0;
    ParameterVector estimate;
    double objective = 0.0;
    std::vector<double> relative_error; // per parameter; absolute error where |θ*| is tiny
    bool fitted = false;                // at least one start converged
    bool success = false;
    bool symmetry_success = false;
};

enum class RecoveryVerdict { practically_identifiable, marginal, not_practically_identifiable };

std::string to_string(RecoveryVerdict v);

struct ErrorQuantiles {
    double median = 0.0;
    double p90 = 0.0;
    double max = 0.0;
};

struct RecoveryReport {
    std::vector<RecoveryTrial> trials;
    double success_rate = 0.0;
    double symmetry_success_rate = 0.0;
    std::vector<ErrorQuantiles> error_quantiles; // per parameter
    Design design;
    std::uint64_t seed = 0;
    RecoveryVerdict verdict = RecoveryVerdict::not_practically_identifiable;
};

RecoveryTrial recover_once(const Model& model, const Design& design, const ParameterVector& truth,
                           std::uint64_t seed, const RecoveryOptions& options = {});

// θ* drawn from the prior (uniform over Θ when absent), one independent
// dataset and multi-start fit per trial.
RecoveryReport global_recovery(const Model& model, const Design& design, int trials,
                               const std::optional<Prior>& prior, std::uint64_t seed,
                               const RecoveryOptions& options = {});

// Linear-interpolation (type 7) quantile; q in [0, 1].
double quantile(std::vector<double> values, double q);

} // namespace identikit
