#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "spinlab/spinlab.hpp"

namespace {

int run(spinlab::Experiment experiment, const std::string& config_path,
        const std::string& out_override, const std::string& format_override,
        std::optional<std::uint64_t> seed_override, int threads) {
    using namespace spinlab;
    ScanConfig cfg;
    try {
        cfg = parse_config_file(config_path);
        if (detail::key_was_set(cfg, "experiment") && cfg.experiment != experiment)
            throw ConfigError(config_path + ": config experiment '" +
                              experiment_name(cfg.experiment) +
                              "' does not match subcommand '" + experiment_name(experiment) +
                              "'");
        cfg.experiment = experiment;
        if (!out_override.empty()) cfg.out = out_override;
        if (!format_override.empty()) cfg.format = format_override;
        if (seed_override) cfg.seed = *seed_override;
        validate_config(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    ResultTable table;
    try {
        table = run_experiment(cfg, &ok, threads);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();

    if (cfg.out.empty()) {
        if (cfg.format == "json")
            table.write_json(std::cout);
        else
            table.write_csv(std::cout);
    } else {
        table.write_file(cfg.out, cfg.format);
        std::cerr << "wrote " << cfg.out << " (" << table.rows.size() << " rows, " << ms
                  << " ms)\n";
    }
    if (!ok) {
        for (const auto& row : table.rows) {
            if (std::get<std::string>(row.back()) != "yes") {
                std::cerr << "verification failure: check '"
                          << std::get<std::string>(row.front())
                          << "' failed; counterexample seed "
                          << spinlab::ResultTable::cell_text(row[5]) << "\n";
            }
        }
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spinlab - collective-spin interferometry scans"};
    app.require_subcommand(1);

    std::string config_path, out_path, format;
    std::optional<std::uint64_t> seed;
    int threads = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "scan config file")->required();
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "random seed (verify-theorem)");
        sub->add_option("--threads", threads,
                        "worker threads (default: SPINLAB_THREADS or hardware)");
    };

    std::vector<std::pair<spinlab::Experiment, CLI::App*>> subs;
    for (spinlab::Experiment e :
         {spinlab::Experiment::sensitivity_vs_chit, spinlab::Experiment::sensitivity_vs_sigma,
          spinlab::Experiment::maxcfi_vs_sigma, spinlab::Experiment::histograms,
          spinlab::Experiment::fixed_T, spinlab::Experiment::verify_theorem}) {
        CLI::App* sub = app.add_subcommand(spinlab::experiment_name(e));
        add_common(sub);
        subs.emplace_back(e, sub);
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& [e, sub] : subs)
        if (sub->parsed()) return run(e, config_path, out_path, format, seed, threads);
    return 2;
}
