#include "identikit/fim.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <limits>

namespace identikit {

std::string to_string(Classification c) {
    return c == Classification::identifiable ? "identifiable" : "rank-deficient";
}

std::string to_string(DesignCriterion c) {
    switch (c) {
    case DesignCriterion::D: return "D";
    case DesignCriterion::A: return "A";
    case DesignCriterion::E: return "E";
    }
    return "?";
}

DesignCriterion parse_design_criterion(const std::string& text) {
    if (text == "D" || text == "d") return DesignCriterion::D;
    if (text == "A" || text == "a") return DesignCriterion::A;
    if (text == "E" || text == "e") return DesignCriterion::E;
    throw PreconditionError("unknown design criterion: " + text);
}

double null_threshold(const FimReport& report) {
    const double lmax = report.eigenvalues.size() ? report.eigenvalues[0] : 0.0;
    return std::max(lmax, 0.0) * report.rank_tolerance;
}

FimReport assemble_fim(const Eigen::MatrixXd& V, double sigma, int replicates, double rank_tolerance) {
    if (!V.allFinite()) throw EvaluationError("sensitivity matrix has non-finite entries");
    if (!(sigma > 0.0)) throw PreconditionError("sigma must be positive");
    if (replicates < 1) throw PreconditionError("replicates must be at least 1");
    if (V.cols() < 1) throw PreconditionError("sensitivity matrix has no columns");

    FimReport r;
    r.sigma = sigma;
    r.replicates = replicates;
    r.rank_tolerance = rank_tolerance;
    r.fim = (V.transpose() * V) * (static_cast<double>(replicates) / (sigma * sigma));
    r.fim = 0.5 * (r.fim + r.fim.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r.fim);
    if (solver.info() != Eigen::Success) throw Error("eigen-decomposition of the FIM failed");
    // Eigen returns ascending order.
    r.eigenvalues = solver.eigenvalues().reverse();
    r.eigenvectors = solver.eigenvectors().rowwise().reverse();

    const auto local = classify_local_identifiability(r, rank_tolerance);
    r.rank = local.rank;
    r.classification = local.classification;
    if (r.eigenvalues.minCoeff() > 0.0) r.sloppiness = detect_sloppiness(r.eigenvalues);
    return r;
}

LocalIdentifiability classify_local_identifiability(const FimReport& report, double tolerance) {
    LocalIdentifiability out;
    const Eigen::VectorXd& lambda = report.eigenvalues;
    const int p = static_cast<int>(lambda.size());
    const double lmax = p ? lambda[0] : 0.0;
    if (!(lmax > 0.0)) {
        out.classification = Classification::rank_deficient;
        out.rank = 0;
        for (int k = 0; k < p; ++k) out.null_directions.push_back(report.eigenvectors.col(k));
        return out;
    }
    for (int k = 0; k < p; ++k) {
        if (lambda[k] / lmax < tolerance) {
            out.null_directions.push_back(report.eigenvectors.col(k));
        } else {
            ++out.rank;
        }
    }
    out.classification =
        out.rank < p ? Classification::rank_deficient : Classification::identifiable;
    return out;
}

SloppinessStats detect_sloppiness(const FimReport& report, double min_decades, double min_r_squared) {
    return detect_sloppiness(report.eigenvalues, min_decades, min_r_squared);
}

SloppinessStats detect_sloppiness(const Eigen::VectorXd& eigenvalues, double min_decades,
                                  double min_r_squared) {
    const Eigen::Index p = eigenvalues.size();
    if (p == 0) throw PreconditionError("no eigenvalues");
    for (Eigen::Index k = 0; k < p; ++k) {
        if (!(eigenvalues[k] > 0.0))
            throw PreconditionError("sloppiness is undefined with a zero eigenvalue; the FIM is rank-deficient");
    }
    const Eigen::VectorXd y = eigenvalues.array().log10();
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(p, 0.0, static_cast<double>(p - 1));

    SloppinessStats s;
    s.spread_decades = y.maxCoeff() - y.minCoeff();
    const double xm = x.mean(), ym = y.mean();
    const double sxx = (x.array() - xm).square().sum();
    const double syy = (y.array() - ym).square().sum();
    const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
    s.slope = sxx > 0 ? sxy / sxx : 0.0;
    s.intercept = ym - s.slope * xm;
    const Eigen::VectorXd resid = y - (s.intercept + s.slope * x.array()).matrix();
    s.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(p));
    // A constant spectrum is trivially log-linear.
    s.r_squared = syy > 0 ? 1.0 - resid.squaredNorm() / syy : 1.0;
    s.sloppy = s.spread_decades >= min_decades && s.r_squared >= min_r_squared;
    return s;
}

CombinationVariance combination_variance(const FimReport& report, const Eigen::VectorXd& a) {
    if (a.size() != report.dimension()) throw PreconditionError("direction has the wrong length");
    if (a.isZero(0.0)) throw PreconditionError("direction must be nonzero");

    const double floor = null_threshold(report);
    const Eigen::VectorXd coeff = report.eigenvectors.transpose() * a;
    CombinationVariance out;
    double var = 0.0;
    double null_mass = 0.0;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) {
        const double lambda = report.eigenvalues[k];
        if (lambda > floor && lambda > 0.0) {
            var += coeff[k] * coeff[k] / lambda;
        } else {
            null_mass += coeff[k] * coeff[k];
        }
    }
    if (report.classification == Classification::identifiable) {
        out.variance = var;
        return out;
    }
    // Components below ~1e-8 relative are treated as rounding noise.
    if (null_mass > 1e-16 * a.squaredNorm()) {
        out.variance = std::numeric_limits<double>::infinity();
        out.status = CombinationVariance::Status::unbounded;
    } else {
        out.variance = var;
        out.status = CombinationVariance::Status::pseudo_inverse;
    }
    return out;
}

double chi_square_quantile(double level, int dof) {
    if (!(level > 0.0 && level < 1.0)) throw PreconditionError("confidence level must lie in (0, 1)");
    if (dof < 1) throw PreconditionError("degrees of freedom must be positive");
    boost::math::chi_squared_distribution<double> dist(dof);
    return boost::math::quantile(dist, level);
}

ConfidenceEllipsoid confidence_ellipsoid(const FimReport& report, const ParameterVector& center,
                                         double level) {
    if (report.classification != Classification::identifiable)
        throw PreconditionError("confidence ellipsoid needs an invertible FIM");
    if (center.size() != report.dimension()) throw PreconditionError("center has the wrong length");
    ConfidenceEllipsoid e;
    e.center = center;
    e.level = level;
    e.axes = report.eigenvectors;
    e.chi_square_quantile = chi_square_quantile(level, report.dimension());
    e.semi_axes = (e.chi_square_quantile / report.eigenvalues.array()).sqrt();
    return e;
}

double design_score(const FimReport& report, DesignCriterion criterion) {
    switch (criterion) {
    case DesignCriterion::D: return report.eigenvalues.prod();
    case DesignCriterion::A: {
        if (report.classification != Classification::identifiable)
            return std::numeric_limits<double>::infinity();
        return report.eigenvalues.cwiseInverse().sum();
    }
    case DesignCriterion::E: return report.eigenvalues.minCoeff();
    }
    return 0.0;
}

double design_score(const Model& model, const Design& design, const ParameterVector& theta,
                    DesignCriterion criterion) {
    return design_score(assemble_fim(sensitivity(model, design, theta), design), criterion);
}

} // namespace identikit
