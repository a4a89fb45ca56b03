#include "identikit/ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <vector>

namespace identikit {

namespace odeint = boost::numeric::odeint;

OdeSolution solve_ode(const OdeSystem& system, std::span<const double> times,
                      const ParameterVector& theta, bool with_sensitivities) {
    if (times.empty()) throw PreconditionError("ODE solve needs at least one output time");
    if (!system.rhs || !system.initial_state) throw PreconditionError("ODE system is incomplete");
    if (times.front() < system.t0) throw PreconditionError("output time precedes the ODE start time");
    if (with_sensitivities && !system.has_partials())
        throw PreconditionError("ODE system does not provide right-hand-side partial derivatives");

    const int d = system.state_dim;
    const int p = static_cast<int>(theta.size());
    const int width = with_sensitivities ? d * (1 + p) : d;

    using State = std::vector<double>;
    State x(static_cast<std::size_t>(width), 0.0);
    const Eigen::VectorXd x0 = system.initial_state(theta);
    for (int k = 0; k < d; ++k) x[k] = x0[k];
    if (with_sensitivities) {
        const Eigen::MatrixXd s0 = system.d_initial_state(theta);
        // Column-major sensitivity block: entry (k, j) at d + j*d + k.
        for (int j = 0; j < p; ++j)
            for (int k = 0; k < d; ++k) x[d + j * d + k] = s0(k, j);
    }

    auto rhs = [&](const State& z, State& dz, double t) {
        const Eigen::Map<const Eigen::VectorXd> state(z.data(), d);
        Eigen::VectorXd dx(d);
        system.rhs(t, state, theta, dx);
        for (int k = 0; k < d; ++k) dz[k] = dx[k];
        if (!with_sensitivities) return;
        const Eigen::MatrixXd gx = system.d_rhs_d_state(t, state, theta);
        const Eigen::MatrixXd gp = system.d_rhs_d_params(t, state, theta);
        const Eigen::Map<const Eigen::MatrixXd> s(z.data() + d, d, p);
        Eigen::Map<Eigen::MatrixXd> ds(dz.data() + d, d, p);
        ds = gx * s + gp;
    };

    std::vector<double> grid;
    grid.reserve(times.size() + 1);
    const bool prepend = times.front() > system.t0;
    if (prepend) grid.push_back(system.t0);
    grid.insert(grid.end(), times.begin(), times.end());

    OdeSolution out;
    out.outputs.resize(static_cast<Eigen::Index>(times.size()));
    if (with_sensitivities) out.sensitivities.resize(static_cast<Eigen::Index>(times.size()), p);

    std::size_t seen = 0;
    auto observer = [&](const State& z, double) {
        if (prepend && seen == 0) {
            ++seen;
            return;
        }
        const Eigen::Index row = static_cast<Eigen::Index>(seen - (prepend ? 1 : 0));
        ++seen;
        const Eigen::Map<const Eigen::VectorXd> state(z.data(), d);
        out.outputs[row] = system.output_weights.dot(state);
        if (with_sensitivities) {
            const Eigen::Map<const Eigen::MatrixXd> s(z.data() + d, d, p);
            out.sensitivities.row(row) = system.output_weights.transpose() * s;
        }
    };

    const double span = grid.back() - grid.front();
    const double dt0 = span > 0 ? span * 1e-3 : 1e-3;
    try {
        auto stepper = odeint::make_dense_output(
            system.abs_tol, system.rel_tol, odeint::runge_kutta_dopri5<State>());
        odeint::integrate_times(stepper, rhs, x, grid.begin(), grid.end(), dt0, observer,
                                odeint::max_step_checker(100000));
    } catch (const std::exception& e) {
        throw IntegratorError(std::string("ODE integration failed: ") + e.what());
    }
    if (seen != grid.size()) throw IntegratorError("ODE integration stopped early");
    if (!out.outputs.allFinite() || (with_sensitivities && !out.sensitivities.allFinite()))
        throw IntegratorError("ODE integration produced non-finite values");
    return out;
}

} // namespace identikit
