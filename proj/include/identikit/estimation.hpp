#pragma once

#include "identikit/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace identikit {

class ParameterMask {
public:
    ParameterMask() = default;
    explicit ParameterMask(int dimension);

    ParameterMask& fix(int index, double value);
    bool is_fixed(int index) const { return fixed_[static_cast<std::size_t>(index)]; }
    double value(int index) const { return values_[static_cast<std::size_t>(index)]; }
    int dimension() const { return static_cast<int>(fixed_.size()); }
    std::vector<int> free_indices() const;
    // Applies the fixed values to θ.
    ParameterVector apply(ParameterVector theta) const;
    // Fixed values must lie within the corresponding Θ bounds.
    void validate(const ParameterSpace& space) const;

private:
    std::vector<bool> fixed_;
    std::vector<double> values_;
};

enum class Termination { small_gradient, small_step, max_iterations, boundary, failure };

std::string to_string(Termination t);

struct EstimateResult {
    ParameterVector theta;
    double objective = 0.0; // S(θ) = ½‖y − f(θ)‖²
    double sigma2_hat = 0.0;
    bool converged = false;
    bool failed = false;
    int iterations = 0;
    ParameterVector start;
    Termination reason = Termination::max_iterations;
    int free_dimension = 0;
    int start_index = -1;
    std::string message;
    std::vector<double> objective_trace; // accepted objectives, when requested
};

class UnidentifiableDesignError : public Error {
public:
    UnidentifiableDesignError(const std::string& what, Eigen::VectorXd direction)
        : Error(what), null_direction(std::move(direction)) {}
    Eigen::VectorXd null_direction;
};

// Closed-form least squares via column-pivoted QR.
EstimateResult linear_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct FitOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8; // on max|∇S| relative to (1 + |S|)
    double step_tolerance = 1e-10;    // relative step
    double initial_damping = 1e-3;    // × max diag(VᵀV)
    double damping_increase = 2.0;
    double damping_decrease = 1.0 / 3.0;
    ParameterMask mask;               // empty = all parameters free
    bool record_trace = false;
};

// Levenberg–Marquardt on the free parameters. Box bounds by projection,
// ordering constraints by rejecting violating steps.
EstimateResult fit(const Model& model, const Dataset& data, const ParameterVector& start,
                   const FitOptions& options = {});

struct OptimumCluster {
    std::vector<int> members; // indices into MultiStartResult::results
    ParameterVector theta;
    double objective = 0.0;
    bool global = false;      // objective ties the best cluster
};

struct MultiStartOptions {
    int starts = 16;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    FitOptions fit;
    double objective_tolerance = 1e-4;
    double parameter_tolerance = 1e-3;
};

struct MultiStartResult {
    std::vector<EstimateResult> results; // sorted by objective
    std::vector<OptimumCluster> clusters;
    int global_cluster_count() const;
    const EstimateResult& best() const { return results.front(); }
};

// Latin-hypercube points over the box of Θ; points violating ordering
// constraints are redrawn uniformly.
std::vector<ParameterVector> latin_hypercube(const ParameterSpace& space, int count, std::uint64_t seed);

MultiStartResult multi_start_fit(const Model& model, const Dataset& data,
                                 const MultiStartOptions& options = {});

bool objectives_tie(double a, double b, double relative, double absolute_floor);
bool parameters_tie(const ParameterVector& a, const ParameterVector& b, double relative);

} // namespace identikit
