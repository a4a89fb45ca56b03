#pragma once

#include "identikit/errors.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace identikit {

using ParameterVector = Eigen::VectorXd;

// Axis-aligned box with optional ordering constraints θ_i > θ_j.
class ParameterSpace {
public:
    ParameterSpace(std::vector<std::string> names, std::vector<double> lower,
                   std::vector<double> upper,
                   std::vector<std::pair<int, int>> ordering = {});

    int dimension() const { return static_cast<int>(lower_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    double lower(int i) const { return lower_[i]; }
    double upper(int i) const { return upper_[i]; }
    const std::vector<std::pair<int, int>>& ordering() const { return ordering_; }

    bool in_box(const ParameterVector& theta) const;
    bool contains(const ParameterVector& theta) const;
    // Throws OutOfBoundsError with a message naming the first violated constraint.
    void require(const ParameterVector& theta) const;

    ParameterVector clamp(const ParameterVector& theta) const;
    ParameterSpace with_ordering(std::vector<std::pair<int, int>> ordering) const;
    ParameterSpace with_bounds(std::vector<double> lower, std::vector<double> upper) const;

private:
    std::vector<std::string> names_;
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<std::pair<int, int>> ordering_;
};

struct Design {
    std::vector<double> times;
    double noise_sd = 1.0;
    int replicates = 1;

    Design() = default;
    Design(std::vector<double> times, double noise_sd, int replicates = 1);

    int size() const { return static_cast<int>(times.size()); }
    int observation_count() const { return size() * replicates; }
    void validate() const;
    Design with_replicates(int r) const;
    Design with_noise(double sd) const;
};

enum class IdentifiabilityLabel {
    globally_identifiable,
    locally_not_globally,
    structurally_unidentifiable,
};

std::string to_string(IdentifiabilityLabel label);

// Autonomous or time-dependent ODE x' = g(t, x, θ) observed through y = wᵀx.
struct OdeSystem {
    using Rhs = std::function<void(double t, const Eigen::VectorXd& x,
                                   const ParameterVector& theta, Eigen::VectorXd& dxdt)>;
    using StateJacobian = std::function<Eigen::MatrixXd(double t, const Eigen::VectorXd& x,
                                                        const ParameterVector& theta)>;
    using InitialState = std::function<Eigen::VectorXd(const ParameterVector& theta)>;
    using InitialJacobian = std::function<Eigen::MatrixXd(const ParameterVector& theta)>;

    int state_dim = 1;
    double t0 = 0.0;
    Rhs rhs;
    StateJacobian d_rhs_d_state;  // state_dim × state_dim
    StateJacobian d_rhs_d_params; // state_dim × p
    InitialState initial_state;
    InitialJacobian d_initial_state; // state_dim × p
    Eigen::VectorXd output_weights;

    double rel_tol = 1e-8;
    double abs_tol = 1e-10;

    bool has_partials() const {
        return d_rhs_d_state && d_rhs_d_params && d_initial_state;
    }
};

// Maps (θ_true, θ_hat) to the member of θ_true's indistinguishability orbit
// closest to θ_hat under this symmetry.
struct Symmetry {
    std::string name;
    std::function<ParameterVector(const ParameterVector& truth, const ParameterVector& estimate)>
        nearest_image;
};

class Model {
public:
    using BatchEvaluator =
        std::function<Eigen::VectorXd(std::span<const double> times, const ParameterVector& theta)>;
    using PointEvaluator = std::function<double(double t, const ParameterVector& theta)>;
    using JacobianFn =
        std::function<Eigen::MatrixXd(std::span<const double> times, const ParameterVector& theta)>;

    Model(std::string name, ParameterSpace space, BatchEvaluator evaluator);
    static Model pointwise(std::string name, ParameterSpace space, PointEvaluator f);

    const std::string& name() const { return name_; }
    const ParameterSpace& space() const { return space_; }
    int dimension() const { return space_.dimension(); }
    const std::optional<IdentifiabilityLabel>& label() const { return label_; }
    const std::optional<ParameterVector>& reference_theta() const { return reference_; }
    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian_); }
    const OdeSystem* ode() const { return ode_.get(); }
    const std::vector<Symmetry>& symmetries() const { return symmetries_; }

    // Raw evaluation: no membership check; callers that need one use evaluate().
    Eigen::VectorXd raw(std::span<const double> times, const ParameterVector& theta) const {
        return evaluator_(times, theta);
    }
    Eigen::MatrixXd analytic_jacobian(std::span<const double> times,
                                      const ParameterVector& theta) const;

    Model with_label(IdentifiabilityLabel label) const;
    Model with_jacobian(JacobianFn jacobian) const;
    Model with_ode(OdeSystem system) const;
    Model with_symmetry(Symmetry symmetry) const;
    Model with_space(ParameterSpace space) const;
    Model with_reference(ParameterVector theta) const;
    Model renamed(std::string name) const;

private:
    std::string name_;
    ParameterSpace space_;
    BatchEvaluator evaluator_;
    JacobianFn jacobian_;
    std::shared_ptr<const OdeSystem> ode_;
    std::optional<IdentifiabilityLabel> label_;
    std::optional<ParameterVector> reference_;
    std::vector<Symmetry> symmetries_;
};

// f(θ) at the design times. Throws OutOfBoundsError when θ ∉ Θ and
// EvaluationError on a non-finite output.
Eigen::VectorXd evaluate(const Model& model, const Design& design, const ParameterVector& theta);

struct Dataset {
    Design design;
    // Row i holds the replicates observed at design.times[i].
    Eigen::MatrixXd observations;
    std::optional<ParameterVector> generating_theta;
    std::uint64_t seed = 0;
    std::string model_name;

    Eigen::VectorXd replicate_means() const;
    double sum_of_squares(const Eigen::VectorXd& fitted) const;
};

// y = f(θ*) + σ z, z drawn in design order (time-major, replicate-minor).
Dataset generate_data(const Model& model, const Design& design, const ParameterVector& truth,
                      std::uint64_t seed);

} // namespace identikit
