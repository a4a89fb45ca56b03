#pragma once

#include "identikit/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace identikit {

using ModelConstants = std::map<std::string, double>;

// f(t_i, θ) = X.row(i) · θ, where design time t_i must equal times[i] exactly.
Model make_linear_model(std::vector<double> times, Eigen::MatrixXd X, double bound = 1e3);

// Polynomial basis in t: f(t, θ) = Σ_k θ_k t^k, k = 0..degree.
Model make_polynomial_model(int degree, double bound = 1e3);

// exp(−θ1 t) + exp(−θ2 t); swap-symmetric.
Model make_biexponential();

// θ1 exp(θ2 t + θ3); only θ1·e^θ3 and θ2 are identifiable.
Model make_redundant_exponential();

// f(θ) = 1 + 1/θ, independent of t.
Model make_reciprocal();

// x' = r x (1 − x/K), x(0) = x0, observed directly; integrated numerically.
Model make_logistic_ode();

// Closed-form logistic solution with its analytic Jacobian. Used as an
// independent reference for the numerically integrated model.
Eigen::VectorXd logistic_closed_form(std::span<const double> times, const ParameterVector& theta);
Eigen::MatrixXd logistic_closed_form_jacobian(std::span<const double> times,
                                              const ParameterVector& theta);

// Built-in models with default constants.
std::vector<Model> builtin_registry();

// Looks a model up by name and applies constants (e.g. "degree" for "linear").
// Throws NotFoundError for unknown names or constants.
Model find_model(const std::string& name, const ModelConstants& constants = {});

} // namespace identikit
