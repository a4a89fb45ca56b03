#include "identikit/estimation.hpp"

#include "identikit/parallel.hpp"
#include "identikit/rng.hpp"
#include "identikit/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace identikit {

ParameterMask::ParameterMask(int dimension)
    : fixed_(static_cast<std::size_t>(dimension), false),
      values_(static_cast<std::size_t>(dimension), 0.0) {}

ParameterMask& ParameterMask::fix(int index, double value) {
    if (index < 0 || index >= dimension()) throw PreconditionError("mask index out of range");
    fixed_[static_cast<std::size_t>(index)] = true;
    values_[static_cast<std::size_t>(index)] = value;
    return *this;
}

std::vector<int> ParameterMask::free_indices() const {
    std::vector<int> out;
    for (int i = 0; i < dimension(); ++i)
        if (!is_fixed(i)) out.push_back(i);
    return out;
}

ParameterVector ParameterMask::apply(ParameterVector theta) const {
    for (int i = 0; i < dimension(); ++i)
        if (is_fixed(i)) theta[i] = value(i);
    return theta;
}

void ParameterMask::validate(const ParameterSpace& space) const {
    if (dimension() != space.dimension()) throw PreconditionError("mask dimension differs from Θ");
    for (int i = 0; i < dimension(); ++i) {
        if (is_fixed(i) && !(value(i) >= space.lower(i) && value(i) <= space.upper(i)))
            throw OutOfBoundsError("fixed value for " + space.names()[i] + " lies outside Θ");
    }
}

std::string to_string(Termination t) {
    switch (t) {
    case Termination::small_gradient: return "small-gradient";
    case Termination::small_step: return "small-step";
    case Termination::max_iterations: return "max-iter";
    case Termination::boundary: return "boundary";
    case Termination::failure: return "failure";
    }
    return "unknown";
}

EstimateResult linear_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() < 1 || X.cols() < 1) throw PreconditionError("design matrix is empty");
    if (X.rows() != y.size()) throw PreconditionError("observation count differs from design rows");

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeFullV);
        Eigen::VectorXd direction = svd.matrixV().col(X.cols() - 1);
        throw UnidentifiableDesignError("design matrix is rank-deficient (rank " +
                                            std::to_string(qr.rank()) + " < " +
                                            std::to_string(X.cols()) + ")",
                                        std::move(direction));
    }

    EstimateResult r;
    r.theta = qr.solve(y);
    r.start = ParameterVector::Zero(X.cols());
    r.objective = 0.5 * (y - X * r.theta).squaredNorm();
    r.sigma2_hat = X.rows() > X.cols()
                       ? 2.0 * r.objective / static_cast<double>(X.rows() - X.cols())
                       : std::numeric_limits<double>::quiet_NaN();
    r.converged = true;
    r.reason = Termination::small_gradient;
    r.free_dimension = static_cast<int>(X.cols());
    return r;
}

namespace {

struct Problem {
    const Model& model;
    const Dataset& data;
    std::vector<int> free;
    double replicates;

    double objective(const Eigen::VectorXd& fitted) const { return data.sum_of_squares(fitted); }

    // Returns false when the model cannot be evaluated at θ.
    bool eval(const ParameterVector& theta, Eigen::VectorXd& fitted, double& s) const {
        try {
            fitted = model.raw(data.design.times, theta);
        } catch (const EvaluationError&) {
            return false;
        } catch (const IntegratorError&) {
            return false;
        }
        if (fitted.size() != data.design.size() || !fitted.allFinite()) return false;
        s = objective(fitted);
        return std::isfinite(s);
    }
};

bool at_lower(const ParameterSpace& space, const ParameterVector& theta, int j) {
    return theta[j] <= space.lower(j);
}
bool at_upper(const ParameterSpace& space, const ParameterVector& theta, int j) {
    return theta[j] >= space.upper(j);
}

} // namespace

EstimateResult fit(const Model& model, const Dataset& data, const ParameterVector& start,
                   const FitOptions& options) {
    const ParameterSpace& space = model.space();
    const int p = model.dimension();
    ParameterMask mask = options.mask.dimension() == 0 ? ParameterMask(p) : options.mask;
    mask.validate(space);
    if (data.observations.rows() != data.design.size())
        throw PreconditionError("dataset rows differ from the design size");

    ParameterVector theta = mask.apply(start);
    space.require(theta);

    Problem problem{model, data, mask.free_indices(), static_cast<double>(data.design.replicates)};
    const int q = static_cast<int>(problem.free.size());
    const int n_obs = data.design.observation_count();

    EstimateResult r;
    r.start = theta;
    r.free_dimension = q;
    auto finish = [&](EstimateResult& res) {
        res.sigma2_hat = n_obs > q ? 2.0 * res.objective / static_cast<double>(n_obs - q)
                                   : std::numeric_limits<double>::quiet_NaN();
        return res;
    };

    Eigen::VectorXd fitted;
    double s = 0.0;
    if (!problem.eval(theta, fitted, s)) {
        r.theta = theta;
        r.objective = std::numeric_limits<double>::infinity();
        r.failed = true;
        r.reason = Termination::failure;
        r.message = "model evaluation failed at the start point";
        return finish(r);
    }
    r.theta = theta;
    r.objective = s;
    if (options.record_trace) r.objective_trace.push_back(s);
    if (q == 0) {
        r.converged = true;
        r.reason = Termination::small_gradient;
        return finish(r);
    }

    const Eigen::VectorXd ybar = data.replicate_means();
    double damping = -1.0;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        r.iterations = iter + 1;
        Eigen::MatrixXd V;
        try {
            V = sensitivity(model, data.design, theta).entries;
        } catch (const Error& e) {
            r.failed = true;
            r.reason = Termination::failure;
            r.message = std::string("sensitivity evaluation failed: ") + e.what();
            return finish(r);
        }
        Eigen::MatrixXd J(V.rows(), q);
        for (int k = 0; k < q; ++k) J.col(k) = V.col(problem.free[k]);

        // ∇S = −R·Jᵀ(ȳ − f); the Gauss–Newton Hessian is R·JᵀJ.
        const Eigen::VectorXd descent = problem.replicates * (J.transpose() * (ybar - fitted));
        const Eigen::MatrixXd H = problem.replicates * (J.transpose() * J);

        // Projected gradient: components pushing against an active bound vanish.
        Eigen::VectorXd projected = descent;
        bool bound_active = false;
        for (int k = 0; k < q; ++k) {
            const int j = problem.free[k];
            if ((at_lower(space, theta, j) && descent[k] < 0) ||
                (at_upper(space, theta, j) && descent[k] > 0)) {
                projected[k] = 0.0;
                bound_active = true;
            }
        }
        if (projected.cwiseAbs().maxCoeff() < options.gradient_tolerance * (1.0 + std::abs(s))) {
            r.converged = true;
            r.reason = bound_active ? Termination::boundary : Termination::small_gradient;
            return finish(r);
        }

        const double diag_max = std::max(H.diagonal().maxCoeff(), std::numeric_limits<double>::min());
        if (damping < 0) damping = options.initial_damping * diag_max;

        bool accepted = false;
        bool ordering_blocked = false;
        while (!accepted) {
            Eigen::MatrixXd A = H;
            A.diagonal().array() += damping;
            const Eigen::VectorXd delta = A.ldlt().solve(descent);

            ParameterVector trial = theta;
            for (int k = 0; k < q; ++k) {
                const int j = problem.free[k];
                trial[j] = std::clamp(theta[j] + delta[k], space.lower(j), space.upper(j));
            }
            const double step = (trial - theta).norm();
            const double scale = theta.norm() + std::numeric_limits<double>::min();
            const bool tiny = !(step > options.step_tolerance * scale);

            bool ok = delta.allFinite();
            if (ok && !space.contains(trial)) {
                ok = false;
                ordering_blocked = true;
            }
            Eigen::VectorXd trial_fitted;
            double trial_s = 0.0;
            if (ok) ok = problem.eval(trial, trial_fitted, trial_s);

            if (ok && trial_s < s) {
                accepted = true;
                theta = trial;
                fitted = std::move(trial_fitted);
                s = trial_s;
                damping *= options.damping_decrease;
                r.theta = theta;
                r.objective = s;
                if (options.record_trace) r.objective_trace.push_back(s);
                if (tiny) {
                    r.converged = true;
                    r.reason = Termination::small_step;
                    return finish(r);
                }
            } else {
                if (tiny) {
                    r.converged = true;
                    r.reason = (bound_active || ordering_blocked) ? Termination::boundary
                                                                  : Termination::small_step;
                    return finish(r);
                }
                damping *= options.damping_increase;
                if (!std::isfinite(damping)) {
                    r.converged = true;
                    r.reason = Termination::small_step;
                    return finish(r);
                }
            }
        }
    }
    r.reason = Termination::max_iterations;
    return finish(r);
}

std::vector<ParameterVector> latin_hypercube(const ParameterSpace& space, int count, std::uint64_t seed) {
    if (count < 1) throw PreconditionError("need at least one start");
    const int p = space.dimension();
    RngStream rng(CounterRng(seed, 0x5eed));
    std::vector<ParameterVector> points(static_cast<std::size_t>(count), ParameterVector(p));
    std::vector<int> perm(static_cast<std::size_t>(count));
    for (int j = 0; j < p; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = count - 1; i > 0; --i) {
            const auto k = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
            std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(k)]);
        }
        const double lo = space.lower(j), hi = space.upper(j);
        for (int i = 0; i < count; ++i) {
            const double u = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / count;
            points[static_cast<std::size_t>(i)][j] = lo + (hi - lo) * u;
        }
    }
    for (auto& point : points) {
        for (int attempt = 0; !space.contains(point); ++attempt) {
            if (attempt > 10000) throw PreconditionError("cannot sample a feasible start point in Θ");
            for (int j = 0; j < p; ++j)
                point[j] = space.lower(j) + (space.upper(j) - space.lower(j)) * rng.uniform();
        }
    }
    return points;
}

bool objectives_tie(double a, double b, double relative, double absolute_floor) {
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    return std::abs(a - b) <= relative * std::max(std::abs(a), std::abs(b)) + absolute_floor;
}

bool parameters_tie(const ParameterVector& a, const ParameterVector& b, double relative) {
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double scale = std::max({std::abs(a[j]), std::abs(b[j]), 1e-8});
        if (std::abs(a[j] - b[j]) > relative * scale) return false;
    }
    return true;
}

int MultiStartResult::global_cluster_count() const {
    return static_cast<int>(std::count_if(clusters.begin(), clusters.end(),
                                          [](const OptimumCluster& c) { return c.global; }));
}

MultiStartResult multi_start_fit(const Model& model, const Dataset& data,
                                 const MultiStartOptions& options) {
    if (options.starts < 1) throw PreconditionError("k_starts must be at least 1");
    const auto starts = latin_hypercube(model.space(), options.starts, options.seed);

    MultiStartResult out;
    out.results.resize(starts.size());
    parallel_for(starts.size(), options.threads, [&](std::size_t i) {
        EstimateResult r = fit(model, data, starts[i], options.fit);
        r.start_index = static_cast<int>(i);
        out.results[i] = std::move(r);
    });
    std::stable_sort(out.results.begin(), out.results.end(),
                     [](const EstimateResult& a, const EstimateResult& b) {
                         if (a.failed != b.failed) return !a.failed;
                         return a.objective < b.objective;
                     });

    const double floor = 1e-12 * 0.5 * data.observations.squaredNorm();
    for (int i = 0; i < static_cast<int>(out.results.size()); ++i) {
        const auto& r = out.results[static_cast<std::size_t>(i)];
        if (r.failed) continue;
        bool placed = false;
        for (auto& c : out.clusters) {
            if (objectives_tie(c.objective, r.objective, options.objective_tolerance, floor) &&
                parameters_tie(c.theta, r.theta, options.parameter_tolerance)) {
                c.members.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) out.clusters.push_back({{i}, r.theta, r.objective, false});
    }
    if (!out.clusters.empty()) {
        const double best = out.clusters.front().objective;
        for (auto& c : out.clusters)
            c.global = objectives_tie(best, c.objective, options.objective_tolerance, floor);
    }
    return out;
}

} // namespace identikit
