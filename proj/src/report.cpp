#include "identikit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace identikit {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

double parse_number(const std::string& text) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw PreconditionError("malformed number: " + text);
    return v;
}

namespace {

// JSON has no inf/nan; encode them as strings so nothing is silently nulled.
json number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
    return out;
}

json vector_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(Eigen::VectorXd(m.row(r).transpose())));
    return out;
}

std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line + '\n';
}

} // namespace

json to_json(const Design& design) {
    return {{"times", vector_json(design.times)},
            {"sigma", number(design.noise_sd)},
            {"replicates", design.replicates}};
}

json to_json(const LocalIdentifiability& local) {
    json dirs = json::array();
    for (const auto& d : local.null_directions) dirs.push_back(vector_json(d));
    return {{"classification", to_string(local.classification)},
            {"rank", local.rank},
            {"null_directions", dirs}};
}

json to_json(const FimReport& r) {
    json out;
    out["fim"] = matrix_json(r.fim);
    out["eigenvalues"] = vector_json(r.eigenvalues);
    // Column k of the decomposition, one array per eigenvector.
    out["eigenvectors"] = matrix_json(r.eigenvectors.transpose());
    out["rank"] = r.rank;
    out["classification"] = to_string(r.classification);
    out["rank_tolerance"] = r.rank_tolerance;
    out["sigma"] = number(r.sigma);
    out["replicates"] = r.replicates;
    if (r.sloppiness) {
        const auto& s = *r.sloppiness;
        out["sloppiness"] = {{"spread_decades", number(s.spread_decades)},
                             {"slope", number(s.slope)},
                             {"intercept", number(s.intercept)},
                             {"r_squared", number(s.r_squared)},
                             {"residual_rms", number(s.residual_rms)},
                             {"sloppy", s.sloppy},
                             {"thresholds", {{"min_decades", 3.0}, {"min_r_squared", 0.9}}}};
    } else {
        out["sloppiness"] = nullptr;
    }
    out["criteria"] = {{"D", number(design_score(r, DesignCriterion::D))},
                       {"A", number(design_score(r, DesignCriterion::A))},
                       {"E", number(design_score(r, DesignCriterion::E))}};
    return out;
}

json to_json(const ConfidenceEllipsoid& e) {
    return {{"center", vector_json(e.center)},
            {"axes", matrix_json(e.axes.transpose())},
            {"semi_axes", vector_json(e.semi_axes)},
            {"level", e.level},
            {"chi_square_quantile", number(e.chi_square_quantile)},
            {"convention", "chi-square quantile with p degrees of freedom"}};
}

json to_json(const EstimateResult& r) {
    json out = {{"theta", vector_json(r.theta)},
                {"objective", number(r.objective)},
                {"sigma2_hat", number(r.sigma2_hat)},
                {"converged", r.converged},
                {"failed", r.failed},
                {"iterations", r.iterations},
                {"start", vector_json(r.start)},
                {"termination", to_string(r.reason)},
                {"free_dimension", r.free_dimension},
                {"start_index", r.start_index}};
    if (!r.message.empty()) out["message"] = r.message;
    return out;
}

json to_json(const MultiStartResult& m) {
    json results = json::array();
    for (const auto& r : m.results) results.push_back(to_json(r));
    json clusters = json::array();
    for (const auto& c : m.clusters) {
        clusters.push_back({{"theta", vector_json(c.theta)},
                            {"objective", number(c.objective)},
                            {"size", c.members.size()},
                            {"global", c.global}});
    }
    return {{"results", results},
            {"clusters", clusters},
            {"global_optima", m.global_cluster_count()},
            {"cluster_tolerances", {{"objective", 1e-4}, {"parameters", 1e-3}}}};
}

json to_json(const ProfileCurve& c) {
    return {{"parameter", c.index},
            {"theta_hat", number(c.theta_hat)},
            {"max_loglik", number(c.max_loglik)},
            {"sigma", number(c.sigma)},
            {"sigma_source", c.sigma_source},
            {"level", c.level},
            {"interval",
             {{"lower", number(c.interval.lower)},
              {"upper", number(c.interval.upper)},
              {"lower_bounded", c.interval.lower_bounded},
              {"upper_bounded", c.interval.upper_bounded}}},
            {"total_variation", number(c.total_variation)},
            {"classification", to_string(c.classification)},
            {"truncated", c.truncated},
            {"grid_points", c.grid.size()},
            {"thresholds", {{"likelihood_drop", "chi-square(1) quantile / 2"}, {"flatness", 1e-6}}}};
}

json to_json(const SobolReport& r, const std::vector<std::string>& names) {
    auto block = [&](const SobolIndices& s) {
        json out = json::array();
        for (std::size_t i = 0; i < s.first.size(); ++i) {
            out.push_back({{"parameter", i < names.size() ? names[i] : std::to_string(i)},
                           {"S_first", number(s.first[i])},
                           {"S_first_se", number(s.first_se[i])},
                           {"S_total", number(s.total[i])},
                           {"S_total_se", number(s.total_se[i])}});
        }
        return out;
    };
    json per_time = json::array();
    for (std::size_t t = 0; t < r.per_time.size(); ++t)
        per_time.push_back({{"variance", number(r.variance[t])}, {"indices", block(r.per_time[t])}});
    return {{"N", r.samples},
            {"bootstrap", r.bootstrap},
            {"seed", r.seed},
            {"rejected", r.rejected},
            {"degenerate", r.degenerate},
            {"aggregation", r.aggregation == Aggregation::variance_weighted ? "variance-weighted" : "mean"},
            {"aggregate_variance", number(r.aggregate_variance)},
            {"aggregate", block(r.aggregate)},
            {"per_time", per_time},
            {"note", "indices computed on the noiseless model output"}};
}

json to_json(const RecoveryTrial& t) {
    return {{"theta_true", vector_json(t.truth)},
            {"seed", t.seed},
            {"theta_hat", vector_json(t.estimate)},
            {"objective", number(t.objective)},
            {"relative_error", vector_json(t.relative_error)},
            {"fitted", t.fitted},
            {"success", t.success},
            {"symmetry_success", t.symmetry_success}};
}

json to_json(const RecoveryReport& r) {
    json trials = json::array();
    for (const auto& t : r.trials) trials.push_back(to_json(t));
    json quantiles = json::array();
    for (const auto& q : r.error_quantiles)
        quantiles.push_back({{"median", number(q.median)}, {"p90", number(q.p90)}, {"max", number(q.max)}});
    return {{"trials", trials},
            {"success_rate", r.success_rate},
            {"symmetry_success_rate", r.symmetry_success_rate},
            {"error_quantiles", quantiles},
            {"design", to_json(r.design)},
            {"seed", r.seed},
            {"verdict", to_string(r.verdict)},
            {"thresholds", {{"identifiable_rate", 0.95}, {"marginal_rate", 0.8}}}};
}

json dataset_metadata(const Dataset& data) {
    json out = {{"model", data.model_name}, {"design", to_json(data.design)}, {"seed", data.seed}};
    out["generating_theta"] = data.generating_theta ? vector_json(*data.generating_theta) : json(nullptr);
    return out;
}

std::string dataset_csv(const Dataset& data) {
    std::string out = "time,replicate,value\n";
    for (Eigen::Index i = 0; i < data.observations.rows(); ++i)
        for (Eigen::Index r = 0; r < data.observations.cols(); ++r)
            out += join({format_number(data.design.times[static_cast<std::size_t>(i)]), std::to_string(r),
                         format_number(data.observations(i, r))});
    return out;
}

std::string estimates_csv(const std::vector<EstimateResult>& results) {
    std::vector<std::string> header{"start_index", "objective", "converged"};
    const Eigen::Index p = results.empty() ? 0 : results.front().theta.size();
    for (Eigen::Index j = 0; j < p; ++j) header.push_back("theta" + std::to_string(j + 1));
    std::string out = join(header);
    for (const auto& r : results) {
        std::vector<std::string> row{std::to_string(r.start_index), format_number(r.objective),
                                     r.converged ? "1" : "0"};
        for (Eigen::Index j = 0; j < p; ++j) row.push_back(format_number(r.theta[j]));
        out += join(row);
    }
    return out;
}

std::string profile_csv(const ProfileCurve& c) {
    std::string out = "theta_i,profile_loglik,converged\n";
    for (std::size_t k = 0; k < c.grid.size(); ++k)
        out += join({format_number(c.grid[k]), format_number(c.loglik[k]), c.converged[k] ? "1" : "0"});
    return out;
}

std::string sobol_csv(const SobolReport& r, const std::vector<std::string>& names) {
    std::string out = "parameter,S_first,S_first_se,S_total,S_total_se\n";
    const auto& a = r.aggregate;
    for (std::size_t i = 0; i < a.first.size(); ++i)
        out += join({i < names.size() ? names[i] : std::to_string(i), format_number(a.first[i]),
                     format_number(a.first_se[i]), format_number(a.total[i]), format_number(a.total_se[i])});
    return out;
}

std::string recovery_csv(const RecoveryReport& r) {
    const Eigen::Index p = r.trials.empty() ? 0 : r.trials.front().truth.size();
    std::vector<std::string> header{"trial"};
    for (Eigen::Index j = 0; j < p; ++j) header.push_back("theta_true" + std::to_string(j + 1));
    for (Eigen::Index j = 0; j < p; ++j) header.push_back("theta_hat" + std::to_string(j + 1));
    for (Eigen::Index j = 0; j < p; ++j) header.push_back("rel_err" + std::to_string(j + 1));
    header.push_back("success");
    std::string out = join(header);
    for (std::size_t k = 0; k < r.trials.size(); ++k) {
        const auto& t = r.trials[k];
        std::vector<std::string> row{std::to_string(k)};
        for (Eigen::Index j = 0; j < p; ++j) row.push_back(format_number(t.truth[j]));
        for (Eigen::Index j = 0; j < p; ++j) row.push_back(format_number(t.estimate[j]));
        for (Eigen::Index j = 0; j < p; ++j) row.push_back(format_number(t.relative_error[static_cast<std::size_t>(j)]));
        row.push_back(t.success ? "1" : "0");
        out += join(row);
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

Dataset read_dataset(const std::string& csv, const json& metadata) {
    Dataset data;
    const auto& d = metadata.at("design");
    data.design = Design(d.at("times").get<std::vector<double>>(), d.at("sigma").get<double>(),
                         d.at("replicates").get<int>());
    data.seed = metadata.at("seed").get<std::uint64_t>();
    data.model_name = metadata.value("model", std::string{});
    if (metadata.contains("generating_theta") && !metadata["generating_theta"].is_null()) {
        const auto v = metadata["generating_theta"].get<std::vector<double>>();
        data.generating_theta = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }

    const CsvTable table = parse_csv(csv);
    if (table.header != std::vector<std::string>{"time", "replicate", "value"})
        throw PreconditionError("dataset CSV header must be time,replicate,value");
    if (static_cast<int>(table.rows.size()) != data.design.observation_count())
        throw PreconditionError("dataset CSV row count differs from the design");
    data.observations.resize(data.design.size(), data.design.replicates);
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto& row = table.rows[k];
        if (row.size() != 3) throw PreconditionError("dataset CSV row has the wrong number of fields");
        const auto i = static_cast<Eigen::Index>(k / static_cast<std::size_t>(data.design.replicates));
        const int r = std::stoi(row[1]);
        if (parse_number(row[0]) != data.design.times[static_cast<std::size_t>(i)] ||
            r != static_cast<int>(k % static_cast<std::size_t>(data.design.replicates)))
            throw PreconditionError("dataset CSV rows are not in design order");
        data.observations(i, r) = parse_number(row[2]);
    }
    return data;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << contents;
    if (!out) throw Error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace identikit
