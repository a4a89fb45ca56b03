#pragma once

#include "identikit/builtins.hpp"
#include "identikit/fim.hpp"
#include "identikit/report.hpp"
#include "identikit/sobol.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace identikit {

struct Diagnostic {
    std::string field;
    std::string message;
};

enum class Analysis { fim, profile, sobol, recover, design_score, all };

std::optional<Analysis> parse_analysis(const std::string& name);
std::string to_string(Analysis a);

struct RunConfig {
    std::string model_name;
    ModelConstants constants;
    std::optional<std::vector<double>> lower, upper;
    std::vector<std::pair<int, int>> ordering;
    Design design;
    std::optional<ParameterVector> theta; // defaults to the model's reference value
    std::uint64_t seed = 0;

    double rank_tolerance = 1e-10;
    double ellipsoid_level = 0.95;

    int estimation_starts = 16;
    int max_iterations = 500;

    std::vector<int> profile_parameters; // empty = all
    std::optional<std::vector<double>> profile_grid;
    int profile_grid_points = 41;
    double profile_level = 0.95;
    double profile_flatness = 1e-6;

    int sobol_samples = 1 << 12;
    int sobol_bootstrap = 200;
    std::optional<Prior> sobol_prior;
    Aggregation sobol_aggregation = Aggregation::variance_weighted;
    double sobol_threshold = 0.01;

    int recover_trials = 20;
    int recover_starts = 16;
    std::optional<Prior> recover_prior;
    double recover_tolerance = 0.1;

    std::vector<DesignCriterion> criteria{DesignCriterion::D, DesignCriterion::A, DesignCriterion::E};

    // Resolves the model with bound/ordering overrides applied.
    Model build_model() const;
    ParameterVector evaluation_theta(const Model& model) const;
};

struct ParsedConfig {
    std::optional<RunConfig> config;
    std::vector<Diagnostic> diagnostics;
};

ParsedConfig parse_config(const json& document);

// Empty iff the document describes a runnable configuration.
std::vector<Diagnostic> validate(const json& document);

} // namespace identikit
