#include "identikit/config.hpp"

#include <cmath>

namespace identikit {

std::optional<Analysis> parse_analysis(const std::string& name) {
    if (name == "fim") return Analysis::fim;
    if (name == "profile") return Analysis::profile;
    if (name == "sobol") return Analysis::sobol;
    if (name == "recover") return Analysis::recover;
    if (name == "design-score") return Analysis::design_score;
    if (name == "all") return Analysis::all;
    return std::nullopt;
}

std::string to_string(Analysis a) {
    switch (a) {
    case Analysis::fim: return "fim";
    case Analysis::profile: return "profile";
    case Analysis::sobol: return "sobol";
    case Analysis::recover: return "recover";
    case Analysis::design_score: return "design-score";
    case Analysis::all: return "all";
    }
    return "unknown";
}

Model RunConfig::build_model() const {
    Model model = find_model(model_name, constants);
    if (lower || upper) {
        const auto& s = model.space();
        const auto p = static_cast<std::size_t>(s.dimension());
        if ((lower && lower->size() != p) || (upper && upper->size() != p))
            throw PreconditionError("bounds must have one entry per parameter");
        std::vector<double> lo, hi;
        for (int i = 0; i < s.dimension(); ++i) {
            lo.push_back(lower ? (*lower)[static_cast<std::size_t>(i)] : s.lower(i));
            hi.push_back(upper ? (*upper)[static_cast<std::size_t>(i)] : s.upper(i));
        }
        model = model.with_space(s.with_bounds(lo, hi));
    }
    if (!ordering.empty()) model = model.with_space(model.space().with_ordering(ordering));
    return model;
}

ParameterVector RunConfig::evaluation_theta(const Model& model) const {
    if (theta) return *theta;
    if (model.reference_theta()) return *model.reference_theta();
    const auto& s = model.space();
    ParameterVector mid(s.dimension());
    for (int i = 0; i < s.dimension(); ++i) mid[i] = 0.5 * (s.lower(i) + s.upper(i));
    return mid;
}

namespace {

class Reader {
public:
    explicit Reader(std::vector<Diagnostic>& diags) : diags_(diags) {}

    void fail(const std::string& field, const std::string& message) { diags_.push_back({field, message}); }

    const json* find(const json& obj, const std::string& key) {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    }

    template <class T>
    std::optional<T> get(const json& obj, const std::string& key, const std::string& field) {
        const json* v = find(obj, key);
        if (!v) return std::nullopt;
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v->is_number()) throw std::runtime_error("not a number");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v->is_number_integer()) throw std::runtime_error("not an integer");
            }
            return v->get<T>();
        } catch (const std::exception&) {
            fail(field, "has the wrong type");
            return std::nullopt;
        }
    }

    std::optional<Prior> prior(const json& obj, const std::string& field) {
        const json* v = find(obj, "prior");
        if (!v) return std::nullopt;
        if (!v->is_array()) {
            fail(field, "must be an array of {kind, lo, hi} objects");
            return std::nullopt;
        }
        std::vector<PriorComponent> comps;
        for (const auto& c : *v) {
            PriorComponent pc;
            const std::string kind = c.value("kind", std::string("uniform"));
            if (kind == "uniform") pc.kind = PriorComponent::Kind::uniform;
            else if (kind == "log-uniform") pc.kind = PriorComponent::Kind::log_uniform;
            else {
                fail(field, "unknown prior kind '" + kind + "'");
                return std::nullopt;
            }
            if (!c.contains("lo") || !c.contains("hi") || !c["lo"].is_number() || !c["hi"].is_number()) {
                fail(field, "each component needs numeric lo and hi");
                return std::nullopt;
            }
            pc.lo = c["lo"].get<double>();
            pc.hi = c["hi"].get<double>();
            comps.push_back(pc);
        }
        try {
            return Prior(std::move(comps));
        } catch (const Error& e) {
            fail(field, e.what());
            return std::nullopt;
        }
    }

private:
    std::vector<Diagnostic>& diags_;
};

const json empty_object = json::object();

const json& section(const json& doc, const std::string& name) {
    auto it = doc.find(name);
    return it != doc.end() && it->is_object() ? *it : empty_object;
}

} // namespace

ParsedConfig parse_config(const json& doc) {
    ParsedConfig out;
    auto& diags = out.diagnostics;
    Reader rd(diags);
    if (!doc.is_object()) {
        diags.push_back({"", "configuration must be a JSON object"});
        return out;
    }
    static const std::vector<std::string> known{"model",   "design", "theta", "seed",   "fim",
                                                "estimation", "profile", "sobol", "recover",
                                                "design_score"};
    for (const auto& [key, value] : doc.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            diags.push_back({key, "unknown section"});
    }

    RunConfig cfg;
    const json& model = section(doc, "model");
    if (auto name = rd.get<std::string>(model, "name", "model.name")) cfg.model_name = *name;
    else rd.fail("model.name", "is required");
    if (const json* c = rd.find(model, "constants")) {
        if (!c->is_object()) rd.fail("model.constants", "must be an object of numbers");
        else
            for (const auto& [k, v] : c->items()) {
                if (!v.is_number()) rd.fail("model.constants." + k, "must be a number");
                else cfg.constants[k] = v.get<double>();
            }
    }
    cfg.lower = rd.get<std::vector<double>>(model, "lower", "model.lower");
    cfg.upper = rd.get<std::vector<double>>(model, "upper", "model.upper");
    if (auto ord = rd.get<std::vector<std::pair<int, int>>>(model, "ordering", "model.ordering"))
        cfg.ordering = *ord;

    std::optional<Model> resolved;
    if (!cfg.model_name.empty()) {
        try {
            resolved = cfg.build_model();
        } catch (const NotFoundError& e) {
            rd.fail("model.name", e.what());
        } catch (const Error& e) {
            rd.fail("model", e.what());
        } catch (const std::exception& e) {
            rd.fail("model", std::string("invalid bounds: ") + e.what());
        }
    }
    const int p = resolved ? resolved->dimension() : 0;

    const json& design = section(doc, "design");
    std::vector<double> times;
    if (const json* t = rd.find(design, "times")) {
        if (t->is_array()) {
            times = rd.get<std::vector<double>>(design, "times", "design.times").value_or(times);
        } else if (t->is_object()) {
            const double start = t->value("start", 0.0), stop = t->value("stop", 1.0);
            const int count = t->value("count", 0);
            if (count < 1) rd.fail("design.times.count", "must be at least 1");
            for (int k = 0; k < count; ++k)
                times.push_back(count == 1 ? start : start + (stop - start) * k / (count - 1.0));
        } else {
            rd.fail("design.times", "must be an array or {start, stop, count}");
        }
    } else {
        rd.fail("design.times", "is required");
    }
    cfg.design.times = times;
    cfg.design.noise_sd = rd.get<double>(design, "sigma", "design.sigma").value_or(0.0);
    if (!rd.find(design, "sigma")) rd.fail("design.sigma", "is required");
    else if (!(cfg.design.noise_sd > 0.0)) rd.fail("design.sigma", "must be positive");
    cfg.design.replicates = rd.get<int>(design, "replicates", "design.replicates").value_or(1);
    if (cfg.design.replicates < 1) rd.fail("design.replicates", "must be at least 1");
    if (times.empty() && rd.find(design, "times")) rd.fail("design.times", "must not be empty");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            rd.fail("design.times", "must be strictly increasing");
            break;
        }
    }

    if (auto theta = rd.get<std::vector<double>>(doc, "theta", "theta")) {
        cfg.theta = Eigen::Map<const Eigen::VectorXd>(theta->data(), static_cast<Eigen::Index>(theta->size()));
        if (resolved) {
            if (!resolved->space().contains(*cfg.theta)) rd.fail("theta", "must lie inside the parameter space");
        }
    }
    if (const json* s = rd.find(doc, "seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
            rd.fail("seed", "must be a non-negative integer");
        else cfg.seed = s->get<std::uint64_t>();
    }

    const json& fim = section(doc, "fim");
    cfg.rank_tolerance = rd.get<double>(fim, "rank_tolerance", "fim.rank_tolerance").value_or(1e-10);
    if (!(cfg.rank_tolerance > 0 && cfg.rank_tolerance < 1)) rd.fail("fim.rank_tolerance", "must lie in (0, 1)");
    cfg.ellipsoid_level = rd.get<double>(fim, "level", "fim.level").value_or(0.95);
    if (!(cfg.ellipsoid_level > 0 && cfg.ellipsoid_level < 1)) rd.fail("fim.level", "must lie in (0, 1)");

    const json& est = section(doc, "estimation");
    cfg.estimation_starts = rd.get<int>(est, "starts", "estimation.starts").value_or(16);
    if (cfg.estimation_starts < 1) rd.fail("estimation.starts", "must be at least 1");
    cfg.max_iterations = rd.get<int>(est, "max_iterations", "estimation.max_iterations").value_or(500);
    if (cfg.max_iterations < 1) rd.fail("estimation.max_iterations", "must be at least 1");

    const json& prof = section(doc, "profile");
    cfg.profile_parameters = rd.get<std::vector<int>>(prof, "parameters", "profile.parameters").value_or(std::vector<int>{});
    for (int i : cfg.profile_parameters)
        if (resolved && (i < 0 || i >= p)) rd.fail("profile.parameters", "index " + std::to_string(i) + " out of range");
    cfg.profile_grid = rd.get<std::vector<double>>(prof, "grid", "profile.grid");
    if (cfg.profile_grid && resolved) {
        if (cfg.profile_grid->empty()) rd.fail("profile.grid", "must not be empty");
        const auto params = cfg.profile_parameters.empty() ? std::vector<int>{} : cfg.profile_parameters;
        for (int i = 0; i < p; ++i) {
            const bool used = params.empty() || std::find(params.begin(), params.end(), i) != params.end();
            if (!used) continue;
            for (double v : *cfg.profile_grid) {
                if (!(v >= resolved->space().lower(i) && v <= resolved->space().upper(i))) {
                    rd.fail("profile.grid", "value " + format_number(v) + " lies outside the range of " +
                                                resolved->space().names()[static_cast<std::size_t>(i)] + " in Θ");
                    i = p;
                    break;
                }
            }
        }
    }
    cfg.profile_grid_points = rd.get<int>(prof, "grid_points", "profile.grid_points").value_or(41);
    if (cfg.profile_grid_points < 3) rd.fail("profile.grid_points", "must be at least 3");
    cfg.profile_level = rd.get<double>(prof, "level", "profile.level").value_or(0.95);
    if (!(cfg.profile_level > 0 && cfg.profile_level < 1)) rd.fail("profile.level", "must lie in (0, 1)");
    cfg.profile_flatness = rd.get<double>(prof, "flatness", "profile.flatness").value_or(1e-6);
    if (!(cfg.profile_flatness >= 0)) rd.fail("profile.flatness", "must be non-negative");

    const json& sob = section(doc, "sobol");
    cfg.sobol_samples = rd.get<int>(sob, "N", "sobol.N").value_or(1 << 12);
    if (cfg.sobol_samples < 1024 || (cfg.sobol_samples & (cfg.sobol_samples - 1)) != 0)
        rd.fail("sobol.N", "must be a power of two no smaller than 1024");
    cfg.sobol_bootstrap = rd.get<int>(sob, "bootstrap", "sobol.bootstrap").value_or(200);
    if (cfg.sobol_bootstrap < 0) rd.fail("sobol.bootstrap", "must be non-negative");
    cfg.sobol_prior = rd.prior(sob, "sobol.prior");
    if (const json* agg = rd.find(sob, "aggregation")) {
        if (*agg == "variance-weighted") cfg.sobol_aggregation = Aggregation::variance_weighted;
        else if (*agg == "mean") cfg.sobol_aggregation = Aggregation::mean;
        else rd.fail("sobol.aggregation", "must be 'variance-weighted' or 'mean'");
    }
    cfg.sobol_threshold = rd.get<double>(sob, "threshold", "sobol.threshold").value_or(0.01);

    const json& rec = section(doc, "recover");
    cfg.recover_trials = rd.get<int>(rec, "k_trials", "recover.k_trials").value_or(20);
    if (cfg.recover_trials < 1) rd.fail("recover.k_trials", "must be at least 1");
    cfg.recover_starts = rd.get<int>(rec, "starts", "recover.starts").value_or(16);
    if (cfg.recover_starts < 1) rd.fail("recover.starts", "must be at least 1");
    cfg.recover_prior = rd.prior(rec, "recover.prior");
    cfg.recover_tolerance = rd.get<double>(rec, "tolerance", "recover.tolerance").value_or(0.1);
    if (!(cfg.recover_tolerance > 0)) rd.fail("recover.tolerance", "must be positive");

    const json& ds = section(doc, "design_score");
    if (auto crit = rd.get<std::vector<std::string>>(ds, "criteria", "design_score.criteria")) {
        cfg.criteria.clear();
        for (const auto& c : *crit) {
            try {
                cfg.criteria.push_back(parse_design_criterion(c));
            } catch (const Error& e) {
                rd.fail("design_score.criteria", e.what());
            }
        }
    }

    if (resolved) {
        const auto check_prior = [&](const std::optional<Prior>& prior, const std::string& field) {
            if (!prior) return;
            try {
                prior->validate(resolved->space());
            } catch (const Error& e) {
                rd.fail(field, e.what());
            }
        };
        check_prior(cfg.sobol_prior, "sobol.prior");
        check_prior(cfg.recover_prior, "recover.prior");
        if (cfg.theta && cfg.theta->size() != p) rd.fail("theta", "has the wrong length");
        if (cfg.lower && static_cast<int>(cfg.lower->size()) != p) rd.fail("model.lower", "has the wrong length");
    }

    if (diags.empty()) out.config = std::move(cfg);
    return out;
}

std::vector<Diagnostic> validate(const json& document) { return parse_config(document).diagnostics; }

} // namespace identikit
