#include "identikit/run.hpp"

#include "identikit/parallel.hpp"
#include "identikit/rng.hpp"
#include "identikit/sensitivity.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace identikit {

namespace {

bool wants(Analysis selected, Analysis a) { return selected == Analysis::all || selected == a; }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json fim_block(const Model& model, const RunConfig& cfg, const ParameterVector& theta) {
    const SensitivityMatrix V = sensitivity(model, cfg.design, theta);
    const FimReport report = assemble_fim(V, cfg.design, cfg.rank_tolerance);
    json out = to_json(report);
    out["theta"] = json::array();
    for (Eigen::Index i = 0; i < theta.size(); ++i) out["theta"].push_back(theta[i]);
    out["sensitivity_method"] = to_string(V.method);
    out["local"] = to_json(classify_local_identifiability(report, cfg.rank_tolerance));
    if (report.classification == Classification::identifiable) {
        out["ellipsoid"] = to_json(confidence_ellipsoid(report, theta, cfg.ellipsoid_level));
        json variances = json::array();
        for (int i = 0; i < report.dimension(); ++i)
            variances.push_back(combination_variance(report, Eigen::VectorXd::Unit(report.dimension(), i)).variance);
        out["parameter_variances"] = variances;
    }
    return out;
}

FitOptions fit_options(const RunConfig& cfg) {
    FitOptions o;
    o.max_iterations = cfg.max_iterations;
    return o;
}

} // namespace

RunOutcome run(const RunConfig& cfg, const RunOptions& options) {
    RunOutcome outcome;
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec || !fs::is_directory(options.out_dir)) {
        outcome.exit_code = exit_validation;
        outcome.message = "output directory " + options.out_dir.string() + " cannot be created";
        return outcome;
    }
    {
        const fs::path probe = options.out_dir / ".identikit-write-test";
        std::ofstream test(probe);
        if (!test) {
            outcome.exit_code = exit_validation;
            outcome.message = "output directory " + options.out_dir.string() + " is not writable";
            return outcome;
        }
        test.close();
        fs::remove(probe, ec);
    }

    const std::uint64_t seed = options.seed.value_or(cfg.seed);
    const std::size_t threads = options.threads == 0 ? default_thread_count() : options.threads;

    json summary;
    summary["timestamp"] = utc_timestamp();
    summary["analysis"] = to_string(options.analysis);
    summary["seed"] = seed;

    try {
        const Model model = cfg.build_model();
        const ParameterVector theta = cfg.evaluation_theta(model);
        model.space().require(theta);
        summary["model"] = {{"name", model.name()},
                            {"parameters", model.space().names()},
                            {"label", model.label() ? to_string(*model.label()) : "unknown"}};
        summary["design"] = to_json(cfg.design);
        summary["theta"] = json::array();
        for (Eigen::Index i = 0; i < theta.size(); ++i) summary["theta"].push_back(theta[i]);
        summary["sigma_source"] = "design";

        const auto& sel = options.analysis;
        if (wants(sel, Analysis::fim)) summary["fim"] = fim_block(model, cfg, theta);

        if (wants(sel, Analysis::design_score)) {
            const FimReport report = assemble_fim(sensitivity(model, cfg.design, theta), cfg.design,
                                                  cfg.rank_tolerance);
            json scores = json::object();
            for (auto c : cfg.criteria) {
                const double v = design_score(report, c);
                scores[to_string(c)] = std::isfinite(v) ? json(v) : json(format_number(v));
            }
            summary["design_score"] = {{"scores", scores},
                                       {"orientation", {{"D", "higher is better"},
                                                        {"A", "lower is better"},
                                                        {"E", "higher is better"}}}};
        }

        if (wants(sel, Analysis::profile)) {
            const Dataset data = generate_data(model, cfg.design, theta, seed);
            write_text_file(options.out_dir / "dataset.csv", dataset_csv(data));
            write_text_file(options.out_dir / "dataset.json", dataset_metadata(data).dump(2) + "\n");

            MultiStartOptions ms;
            ms.starts = cfg.estimation_starts;
            ms.seed = mix64(seed ^ 0xf17ULL);
            ms.threads = threads;
            ms.fit = fit_options(cfg);
            const MultiStartResult fits = multi_start_fit(model, data, ms);
            write_text_file(options.out_dir / "estimates.csv", estimates_csv(fits.results));
            summary["estimation"] = to_json(fits);

            std::vector<int> params = cfg.profile_parameters;
            if (params.empty())
                for (int i = 0; i < model.dimension(); ++i) params.push_back(i);
            ProfileOptions po;
            po.level = cfg.profile_level;
            po.flatness = cfg.profile_flatness;
            po.grid_points = cfg.profile_grid_points;
            po.grid = cfg.profile_grid;
            po.fit = fit_options(cfg);
            std::vector<ProfileCurve> curves(params.size());
            const EstimateResult& best = fits.best();
            if (!best.converged || best.failed) throw Error("no start converged; cannot profile");
            parallel_for(params.size(), threads, [&](std::size_t k) {
                curves[k] = profile_parameter(model, data, best, params[k], po);
            });
            json profiles = json::array();
            for (const auto& c : curves) {
                write_text_file(options.out_dir / ("profile_" + std::to_string(c.index) + ".csv"), profile_csv(c));
                profiles.push_back(to_json(c));
            }
            summary["profile"] = profiles;
        }

        if (wants(sel, Analysis::sobol)) {
            SobolOptions so;
            so.samples = cfg.sobol_samples;
            so.bootstrap = cfg.sobol_bootstrap;
            so.seed = seed;
            so.aggregation = cfg.sobol_aggregation;
            so.threads = threads;
            const Prior prior = cfg.sobol_prior.value_or(Prior::uniform_over(model.space()));
            const SobolReport report = sobol_indices(model, cfg.design, prior, so);
            write_text_file(options.out_dir / "sobol.csv", sobol_csv(report, model.space().names()));
            json block = to_json(report, model.space().names());
            block["screen"] = {{"threshold", cfg.sobol_threshold},
                               {"unlikely_estimable", screen_unidentifiable(report, cfg.sobol_threshold)},
                               {"note", "necessary, not sufficient"}};
            summary["sobol"] = block;
        }

        if (wants(sel, Analysis::recover)) {
            RecoveryOptions ro;
            ro.starts = cfg.recover_starts;
            ro.relative_tolerance = cfg.recover_tolerance;
            ro.fit = fit_options(cfg);
            ro.threads = threads;
            const RecoveryReport report =
                global_recovery(model, cfg.design, cfg.recover_trials, cfg.recover_prior, seed, ro);
            write_text_file(options.out_dir / "recovery.csv", recovery_csv(report));
            summary["recover"] = to_json(report);
        }
    } catch (const std::exception& e) {
        outcome.exit_code = exit_analysis;
        outcome.message = std::string("analysis failed: ") + e.what();
        summary["error"] = outcome.message;
    }

    try {
        write_text_file(options.out_dir / "summary.json", summary.dump(2) + "\n");
    } catch (const std::exception& e) {
        outcome.exit_code = exit_analysis;
        outcome.message = e.what();
    }
    outcome.summary = std::move(summary);
    return outcome;
}

RunOutcome run(const json& document, const RunOptions& options) {
    ParsedConfig parsed = parse_config(document);
    if (!parsed.config) {
        RunOutcome outcome;
        outcome.exit_code = exit_validation;
        std::ostringstream msg;
        for (const auto& d : parsed.diagnostics) msg << d.field << ": " << d.message << "\n";
        outcome.message = msg.str();
        return outcome;
    }
    return run(*parsed.config, options);
}

std::string list_models() {
    std::ostringstream out;
    for (const auto& m : builtin_registry()) {
        out << m.name() << "\t" << m.dimension() << (m.dimension() == 1 ? " parameter\t" : " parameters\t")
            << (m.label() ? to_string(*m.label()) : "unknown") << "\n";
    }
    return out.str();
}

} // namespace identikit
