#include "identikit/sensitivity.hpp"

#include "identikit/ode.hpp"

#include <cmath>

namespace identikit {

std::string to_string(SensitivityMethod method) {
    switch (method) {
    case SensitivityMethod::finite_difference: return "finite-difference";
    case SensitivityMethod::forward_ode: return "forward-ode";
    case SensitivityMethod::analytic: return "analytic";
    }
    return "unknown";
}

namespace {

Eigen::VectorXd checked_raw(const Model& model, const Design& design, const ParameterVector& theta) {
    Eigen::VectorXd f = model.raw(design.times, theta);
    if (f.size() != design.size() || !f.allFinite())
        throw EvaluationError("non-finite model output while differentiating " + model.name());
    return f;
}

} // namespace

SensitivityMatrix fd_jacobian(const Model& model, const Design& design, const ParameterVector& theta,
                              StepRule rule) {
    design.validate();
    const auto& space = model.space();
    if (!space.in_box(theta)) space.require(theta);

    const int p = model.dimension();
    SensitivityMatrix out;
    out.theta = theta;
    out.method = SensitivityMethod::finite_difference;
    out.entries.resize(design.size(), p);

    Eigen::VectorXd center;
    for (int j = 0; j < p; ++j) {
        const double h = rule.relative * std::max(std::abs(theta[j]), 1.0);
        const bool up_ok = theta[j] + h <= space.upper(j);
        const bool down_ok = theta[j] - h >= space.lower(j);

        ParameterVector plus = theta, minus = theta;
        if (up_ok && down_ok) {
            plus[j] += h;
            minus[j] -= h;
            // Use the actually representable step.
            const double width = plus[j] - minus[j];
            out.entries.col(j) =
                (checked_raw(model, design, plus) - checked_raw(model, design, minus)) / width;
            continue;
        }
        if (!up_ok && !down_ok)
            throw PreconditionError("parameter range for " + space.names()[j] +
                                    " is narrower than the difference step");
        if (center.size() == 0) center = checked_raw(model, design, theta);
        out.one_sided_columns.push_back(j);
        if (up_ok) {
            plus[j] += h;
            out.entries.col(j) = (checked_raw(model, design, plus) - center) / (plus[j] - theta[j]);
        } else {
            minus[j] -= h;
            out.entries.col(j) = (center - checked_raw(model, design, minus)) / (theta[j] - minus[j]);
        }
    }
    return out;
}

SensitivityMatrix forward_ode_jacobian(const Model& model, const Design& design,
                                       const ParameterVector& theta) {
    design.validate();
    const OdeSystem* system = model.ode();
    if (!system) throw PreconditionError("model " + model.name() + " is not an ODE model");
    if (!system->has_partials())
        throw PreconditionError("model " + model.name() + " is missing right-hand-side partials");
    model.space().require(theta);

    SensitivityMatrix out;
    out.theta = theta;
    out.method = SensitivityMethod::forward_ode;
    out.entries = solve_ode(*system, design.times, theta, true).sensitivities;
    return out;
}

SensitivityMatrix sensitivity(const Model& model, const Design& design, const ParameterVector& theta) {
    if (model.has_analytic_jacobian()) {
        design.validate();
        model.space().require(theta);
        SensitivityMatrix out;
        out.theta = theta;
        out.method = SensitivityMethod::analytic;
        out.entries = model.analytic_jacobian(design.times, theta);
        if (!out.entries.allFinite()) throw EvaluationError("non-finite analytic Jacobian");
        return out;
    }
    if (model.ode() && model.ode()->has_partials()) return forward_ode_jacobian(model, design, theta);
    return fd_jacobian(model, design, theta);
}

double relative_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& reference) {
    if (a.rows() != reference.rows() || a.cols() != reference.cols())
        throw PreconditionError("matrix shapes differ");
    if (a.size() == 0) return 0.0;
    return (a - reference).cwiseAbs().maxCoeff() / (reference.cwiseAbs().maxCoeff() + 1e-12);
}

} // namespace identikit
