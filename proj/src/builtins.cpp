#include "identikit/builtins.hpp"

#include "identikit/ode.hpp"

#include <algorithm>
#include <cmath>

namespace identikit {

Model make_linear_model(std::vector<double> times, Eigen::MatrixXd X, double bound) {
    if (X.rows() != static_cast<Eigen::Index>(times.size()))
        throw PreconditionError("linear model needs one design-matrix row per time point");
    if (X.cols() < 1) throw PreconditionError("linear model needs at least one column");
    const int p = static_cast<int>(X.cols());
    ParameterSpace space({}, std::vector<double>(p, -bound), std::vector<double>(p, bound));

    auto rows_for = [times, X](std::span<const double> query) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(query.size()), X.cols());
        for (std::size_t q = 0; q < query.size(); ++q) {
            const auto it = std::find(times.begin(), times.end(), query[q]);
            if (it == times.end())
                throw EvaluationError("linear model has no design row for t = " +
                                      std::to_string(query[q]));
            out.row(static_cast<Eigen::Index>(q)) = X.row(it - times.begin());
        }
        return out;
    };
    Model model("linear", std::move(space),
                [rows_for](std::span<const double> t, const ParameterVector& theta) {
                    return Eigen::VectorXd(rows_for(t) * theta);
                });
    return model
        .with_jacobian([rows_for](std::span<const double> t, const ParameterVector&) {
            return rows_for(t);
        })
        .with_label(IdentifiabilityLabel::globally_identifiable)
        .with_reference(ParameterVector::Ones(p));
}

Model make_polynomial_model(int degree, double bound) {
    if (degree < 0) throw PreconditionError("polynomial degree must be non-negative");
    const int p = degree + 1;
    std::vector<std::string> names;
    for (int k = 0; k < p; ++k) names.push_back("c" + std::to_string(k));
    ParameterSpace space(names, std::vector<double>(p, -bound), std::vector<double>(p, bound));

    auto basis = [p](std::span<const double> t) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(t.size()), p);
        for (std::size_t i = 0; i < t.size(); ++i) {
            double power = 1.0;
            for (int k = 0; k < p; ++k) {
                X(static_cast<Eigen::Index>(i), k) = power;
                power *= t[i];
            }
        }
        return X;
    };
    Model model("linear", std::move(space),
                [basis](std::span<const double> t, const ParameterVector& theta) {
                    return Eigen::VectorXd(basis(t) * theta);
                });
    return model
        .with_jacobian([basis](std::span<const double> t, const ParameterVector&) { return basis(t); })
        .with_label(IdentifiabilityLabel::globally_identifiable)
        .with_reference(ParameterVector::Ones(p));
}

Model make_biexponential() {
    ParameterSpace space({"theta1", "theta2"}, {0.01, 0.01}, {10.0, 10.0});
    auto model = Model::pointwise("biexponential", std::move(space),
                                  [](double t, const ParameterVector& theta) {
                                      return std::exp(-theta[0] * t) + std::exp(-theta[1] * t);
                                  });
    return model
        .with_jacobian([](std::span<const double> t, const ParameterVector& theta) {
            Eigen::MatrixXd J(static_cast<Eigen::Index>(t.size()), 2);
            for (std::size_t i = 0; i < t.size(); ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                J(r, 0) = -t[i] * std::exp(-theta[0] * t[i]);
                J(r, 1) = -t[i] * std::exp(-theta[1] * t[i]);
            }
            return J;
        })
        .with_symmetry({"swap", [](const ParameterVector& truth, const ParameterVector&) {
                            return ParameterVector(truth.reverse());
                        }})
        .with_label(IdentifiabilityLabel::locally_not_globally)
        .with_reference((ParameterVector(2) << 2.0, 1.0).finished());
}

Model make_redundant_exponential() {
    ParameterSpace space({"theta1", "theta2", "theta3"}, {0.1, -2.0, -5.0}, {10.0, 2.0, 5.0});
    auto model = Model::pointwise("redundant-exponential", std::move(space),
                                  [](double t, const ParameterVector& theta) {
                                      return theta[0] * std::exp(theta[1] * t + theta[2]);
                                  });
    return model
        .with_jacobian([](std::span<const double> t, const ParameterVector& theta) {
            Eigen::MatrixXd J(static_cast<Eigen::Index>(t.size()), 3);
            for (std::size_t i = 0; i < t.size(); ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                const double e = std::exp(theta[1] * t[i] + theta[2]);
                J(r, 0) = e;
                J(r, 1) = theta[0] * t[i] * e;
                J(r, 2) = theta[0] * e;
            }
            return J;
        })
        // (θ1, θ2, θ3) ~ (θ1·e^c, θ2, θ3 − c); pick c so the θ3 coordinates coincide.
        .with_symmetry({"scale", [](const ParameterVector& truth, const ParameterVector& estimate) {
                            const double c = truth[2] - estimate[2];
                            ParameterVector image = truth;
                            image[0] = truth[0] * std::exp(c);
                            image[2] = truth[2] - c;
                            return image;
                        }})
        .with_label(IdentifiabilityLabel::structurally_unidentifiable)
        .with_reference((ParameterVector(3) << 2.0, -0.5, 0.5).finished());
}

Model make_reciprocal() {
    ParameterSpace space({"theta"}, {0.01}, {1000.0});
    auto model = Model::pointwise("reciprocal", std::move(space),
                                  [](double, const ParameterVector& theta) { return 1.0 + 1.0 / theta[0]; });
    return model
        .with_jacobian([](std::span<const double> t, const ParameterVector& theta) {
            return Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(t.size()), 1,
                                             -1.0 / (theta[0] * theta[0]));
        })
        .with_label(IdentifiabilityLabel::globally_identifiable)
        .with_reference(ParameterVector::Constant(1, 0.5));
}

Eigen::VectorXd logistic_closed_form(std::span<const double> times, const ParameterVector& theta) {
    const double r = theta[0], K = theta[1], x0 = theta[2];
    Eigen::VectorXd out(static_cast<Eigen::Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double e = std::exp(-r * times[i]);
        out[static_cast<Eigen::Index>(i)] = K * x0 / (x0 + (K - x0) * e);
    }
    return out;
}

Eigen::MatrixXd logistic_closed_form_jacobian(std::span<const double> times,
                                              const ParameterVector& theta) {
    const double r = theta[0], K = theta[1], x0 = theta[2];
    Eigen::MatrixXd J(static_cast<Eigen::Index>(times.size()), 3);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const double e = std::exp(-r * t);
        const double D = x0 + (K - x0) * e;
        const auto row = static_cast<Eigen::Index>(i);
        J(row, 0) = K * x0 * (K - x0) * t * e / (D * D);
        J(row, 1) = x0 * x0 * (1.0 - e) / (D * D);
        J(row, 2) = K * K * e / (D * D);
    }
    return J;
}

Model make_logistic_ode() {
    OdeSystem sys;
    sys.state_dim = 1;
    sys.t0 = 0.0;
    sys.rhs = [](double, const Eigen::VectorXd& x, const ParameterVector& theta, Eigen::VectorXd& dx) {
        dx[0] = theta[0] * x[0] * (1.0 - x[0] / theta[1]);
    };
    sys.d_rhs_d_state = [](double, const Eigen::VectorXd& x, const ParameterVector& theta) {
        Eigen::MatrixXd g(1, 1);
        g(0, 0) = theta[0] * (1.0 - 2.0 * x[0] / theta[1]);
        return g;
    };
    sys.d_rhs_d_params = [](double, const Eigen::VectorXd& x, const ParameterVector& theta) {
        Eigen::MatrixXd g(1, 3);
        g(0, 0) = x[0] * (1.0 - x[0] / theta[1]);
        g(0, 1) = theta[0] * x[0] * x[0] / (theta[1] * theta[1]);
        g(0, 2) = 0.0;
        return g;
    };
    sys.initial_state = [](const ParameterVector& theta) {
        return Eigen::VectorXd::Constant(1, theta[2]);
    };
    sys.d_initial_state = [](const ParameterVector&) {
        Eigen::MatrixXd s(1, 3);
        s << 0.0, 0.0, 1.0;
        return s;
    };
    sys.output_weights = Eigen::VectorXd::Ones(1);

    ParameterSpace space({"r", "K", "x0"}, {0.01, 0.1, 0.001}, {10.0, 100.0, 100.0});
    Model model("logistic", std::move(space),
                [sys](std::span<const double> t, const ParameterVector& theta) {
                    return solve_ode(sys, t, theta, false).outputs;
                });
    return model.with_ode(std::move(sys))
        .with_label(IdentifiabilityLabel::globally_identifiable)
        .with_reference((ParameterVector(3) << 1.0, 1.0, 0.5).finished());
}

std::vector<Model> builtin_registry() {
    return {make_polynomial_model(1), make_biexponential(), make_redundant_exponential(),
            make_reciprocal(), make_logistic_ode()};
}

Model find_model(const std::string& name, const ModelConstants& constants) {
    auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : constants) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) throw NotFoundError("model " + name + " has no constant named " + key);
        }
    };
    if (name == "linear") {
        reject_unknown({"degree", "bound"});
        const double degree = constants.contains("degree") ? constants.at("degree") : 1.0;
        const double bound = constants.contains("bound") ? constants.at("bound") : 1e3;
        if (degree < 0 || degree != std::floor(degree) || degree > 20)
            throw PreconditionError("linear.degree must be an integer in [0, 20]");
        return make_polynomial_model(static_cast<int>(degree), bound);
    }
    reject_unknown({});
    for (auto& m : builtin_registry()) {
        if (m.name() == name) return m;
    }
    throw NotFoundError("unknown model: " + name);
}

} // namespace identikit
