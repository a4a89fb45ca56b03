#include "identikit/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace identikit;

    CLI::App app{"identikit: parameter identifiability analysis for deterministic time-series models"};
    std::string subcommand;
    std::string config_path;
    std::string out_dir = "identikit-out";
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
    bool list = false;

    app.add_option("subcommand", subcommand, "fim | profile | sobol | recover | design-score | all");
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker thread cap (0 = hardware concurrency)");
    app.add_option("--seed", seed, "overrides the configuration seed");
    app.add_flag("--list-models", list, "print the built-in model registry and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    if (list) {
        std::cout << list_models();
        return exit_ok;
    }

    const auto analysis = parse_analysis(subcommand);
    if (!analysis) {
        std::cerr << "error: unknown or missing subcommand '" << subcommand << "'\n";
        return exit_validation;
    }
    if (config_path.empty()) {
        std::cerr << "error: --config is required\n";
        return exit_validation;
    }

    json document;
    try {
        document = json::parse(read_text_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "error: cannot read configuration: " << e.what() << "\n";
        return exit_validation;
    }

    RunOptions options;
    options.analysis = *analysis;
    options.out_dir = out_dir;
    options.threads = threads;
    options.seed = seed;
    const RunOutcome outcome = run(document, options);
    if (outcome.exit_code != exit_ok) {
        std::cerr << "error: " << outcome.message;
        if (!outcome.message.empty() && outcome.message.back() != '\n') std::cerr << "\n";
    } else {
        std::cout << "wrote " << out_dir << "/summary.json\n";
    }
    return outcome.exit_code;
}
