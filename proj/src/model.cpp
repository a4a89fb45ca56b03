#include "identikit/model.hpp"

#include "identikit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace identikit {

ParameterSpace::ParameterSpace(std::vector<std::string> names, std::vector<double> lower,
                               std::vector<double> upper,
                               std::vector<std::pair<int, int>> ordering)
    : names_(std::move(names)), lower_(std::move(lower)), upper_(std::move(upper)),
      ordering_(std::move(ordering)) {
    if (lower_.empty()) throw PreconditionError("parameter space needs at least one parameter");
    if (lower_.size() != upper_.size())
        throw PreconditionError("lower and upper bounds differ in length");
    if (names_.empty()) {
        for (std::size_t i = 0; i < lower_.size(); ++i) names_.push_back("theta" + std::to_string(i + 1));
    }
    if (names_.size() != lower_.size())
        throw PreconditionError("parameter names and bounds differ in length");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i]))
            throw PreconditionError("lower bound must be below upper bound for " + names_[i]);
    }
    const int p = dimension();
    for (auto [i, j] : ordering_) {
        if (i < 0 || j < 0 || i >= p || j >= p || i == j)
            throw PreconditionError("ordering constraint references invalid indices");
    }
}

bool ParameterSpace::in_box(const ParameterVector& theta) const {
    if (theta.size() != dimension()) return false;
    for (int i = 0; i < dimension(); ++i) {
        if (!(theta[i] >= lower_[i] && theta[i] <= upper_[i])) return false;
    }
    return true;
}

bool ParameterSpace::contains(const ParameterVector& theta) const {
    if (!in_box(theta)) return false;
    for (auto [i, j] : ordering_) {
        if (!(theta[i] > theta[j])) return false;
    }
    return true;
}

void ParameterSpace::require(const ParameterVector& theta) const {
    if (theta.size() != dimension()) {
        std::ostringstream msg;
        msg << "parameter vector has length " << theta.size() << ", expected " << dimension();
        throw OutOfBoundsError(msg.str());
    }
    for (int i = 0; i < dimension(); ++i) {
        if (!(theta[i] >= lower_[i] && theta[i] <= upper_[i])) {
            std::ostringstream msg;
            msg << names_[i] << " = " << theta[i] << " outside [" << lower_[i] << ", " << upper_[i]
                << "]";
            throw OutOfBoundsError(msg.str());
        }
    }
    for (auto [i, j] : ordering_) {
        if (!(theta[i] > theta[j]))
            throw OutOfBoundsError("ordering constraint " + names_[i] + " > " + names_[j] +
                                   " violated");
    }
}

ParameterVector ParameterSpace::clamp(const ParameterVector& theta) const {
    ParameterVector out = theta;
    for (int i = 0; i < dimension(); ++i) out[i] = std::clamp(out[i], lower_[i], upper_[i]);
    return out;
}

ParameterSpace ParameterSpace::with_ordering(std::vector<std::pair<int, int>> ordering) const {
    return ParameterSpace(names_, lower_, upper_, std::move(ordering));
}

ParameterSpace ParameterSpace::with_bounds(std::vector<double> lower, std::vector<double> upper) const {
    return ParameterSpace(names_, std::move(lower), std::move(upper), ordering_);
}

Design::Design(std::vector<double> t, double sd, int r)
    : times(std::move(t)), noise_sd(sd), replicates(r) {
    validate();
}

void Design::validate() const {
    if (times.empty()) throw PreconditionError("design.times must contain at least one time point");
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd))
        throw PreconditionError("design.sigma must be positive");
    if (replicates < 1) throw PreconditionError("design.replicates must be at least 1");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw PreconditionError("design.times must be finite");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw PreconditionError("design.times must be strictly increasing");
    }
}

Design Design::with_replicates(int r) const { return Design(times, noise_sd, r); }
Design Design::with_noise(double sd) const { return Design(times, sd, replicates); }

std::string to_string(IdentifiabilityLabel label) {
    switch (label) {
    case IdentifiabilityLabel::globally_identifiable: return "globally-identifiable";
    case IdentifiabilityLabel::locally_not_globally: return "locally-not-globally";
    case IdentifiabilityLabel::structurally_unidentifiable: return "structurally-unidentifiable";
    }
    return "unknown";
}

Model::Model(std::string name, ParameterSpace space, BatchEvaluator evaluator)
    : name_(std::move(name)), space_(std::move(space)), evaluator_(std::move(evaluator)) {
    if (!evaluator_) throw PreconditionError("model " + name_ + " has no evaluator");
}

Model Model::pointwise(std::string name, ParameterSpace space, PointEvaluator f) {
    return Model(std::move(name), std::move(space),
                 [f = std::move(f)](std::span<const double> times, const ParameterVector& theta) {
                     Eigen::VectorXd out(static_cast<Eigen::Index>(times.size()));
                     for (std::size_t i = 0; i < times.size(); ++i) out[i] = f(times[i], theta);
                     return out;
                 });
}

Eigen::MatrixXd Model::analytic_jacobian(std::span<const double> times,
                                         const ParameterVector& theta) const {
    if (!jacobian_) throw NotFoundError("model " + name_ + " has no analytic Jacobian");
    return jacobian_(times, theta);
}

Model Model::with_label(IdentifiabilityLabel label) const {
    Model m = *this;
    m.label_ = label;
    return m;
}

Model Model::with_jacobian(JacobianFn jacobian) const {
    Model m = *this;
    m.jacobian_ = std::move(jacobian);
    return m;
}

Model Model::with_ode(OdeSystem system) const {
    Model m = *this;
    m.ode_ = std::make_shared<const OdeSystem>(std::move(system));
    return m;
}

Model Model::with_symmetry(Symmetry symmetry) const {
    Model m = *this;
    m.symmetries_.push_back(std::move(symmetry));
    return m;
}

Model Model::with_space(ParameterSpace space) const {
    if (space.dimension() != dimension())
        throw PreconditionError("replacement parameter space changes the dimension");
    Model m = *this;
    m.space_ = std::move(space);
    return m;
}

Model Model::with_reference(ParameterVector theta) const {
    space_.require(theta);
    Model m = *this;
    m.reference_ = std::move(theta);
    return m;
}

Model Model::renamed(std::string name) const {
    Model m = *this;
    m.name_ = std::move(name);
    return m;
}

Eigen::VectorXd evaluate(const Model& model, const Design& design, const ParameterVector& theta) {
    model.space().require(theta);
    Eigen::VectorXd out = model.raw(design.times, theta);
    if (out.size() != design.size())
        throw EvaluationError("model " + model.name() + " returned the wrong number of outputs");
    if (!out.allFinite())
        throw EvaluationError("model " + model.name() + " produced a non-finite output");
    return out;
}

Eigen::VectorXd Dataset::replicate_means() const { return observations.rowwise().mean(); }

double Dataset::sum_of_squares(const Eigen::VectorXd& fitted) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < observations.rows(); ++i) {
        for (Eigen::Index r = 0; r < observations.cols(); ++r) {
            const double e = observations(i, r) - fitted[i];
            s += e * e;
        }
    }
    return 0.5 * s;
}

Dataset generate_data(const Model& model, const Design& design, const ParameterVector& truth,
                      std::uint64_t seed) {
    design.validate();
    const Eigen::VectorXd mean = evaluate(model, design, truth);
    const CounterRng rng(seed, 0);

    Dataset data;
    data.design = design;
    data.generating_theta = truth;
    data.seed = seed;
    data.model_name = model.name();
    data.observations.resize(design.size(), design.replicates);
    std::uint64_t k = 0;
    for (int i = 0; i < design.size(); ++i) {
        for (int r = 0; r < design.replicates; ++r) {
            data.observations(i, r) = mean[i] + design.noise_sd * rng.normal(k++);
        }
    }
    return data;
}

} // namespace identikit
