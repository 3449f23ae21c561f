// Command line driver: simulate | estimate | oracle | sweep.

#include "fracdrift/errors.hpp"
#include "fracdrift/harness.hpp"
#include "fracdrift/io.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace fracdrift;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* command, CommonOptions& options) {
    command->add_option("--config", options.config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
    command->add_option("--out", options.out_dir, "Output directory");
    command->add_option("--seed", options.seed, "Master seed (overrides the config)");
}

ExperimentConfig load_config(const CommonOptions& options) {
    ExperimentConfig config = ExperimentConfig::load(options.config_path);
    if (options.seed) config.seed = *options.seed;
    return config;
}

int simulate(const CommonOptions& options) {
    const ExperimentConfig config = load_config(options);
    const fs::path out(options.out_dir);
    std::size_t failures = 0;
    const auto cells = expand_cells(config);
    for (const Cell& cell : cells) {
        try {
            const SdeEnsemble ensemble =
                simulate_ensemble(ensemble_config(config, cell, replication_seed(config.seed, cell, 0)));
            write_ensemble(ensemble, out / ("ensemble_" + cell.label() + ".csv"),
                           out / ("ensemble_" + cell.label() + ".json"));
            std::cout << cell.label() << ": " << ensemble.size() << " paths\n";
        } catch (const NumericalError& e) {
            std::cerr << cell.label() << ": " << e.what() << '\n';
            ++failures;
        }
    }
    return failures == cells.size() ? kNumericalFailure : 0;
}

int estimate(const CommonOptions& options, bool oracle_only) {
    const ExperimentConfig config = load_config(options);
    const fs::path out(options.out_dir);
    const ReferenceDensity reference = reference_density(config);
    const IntervalSupport support(config.interval_lo, config.interval_hi);
    const DriftSpec drift = make_drift(config.drift_id, config.drift_rate);
    const auto cells = expand_cells(config);
    std::size_t failures = 0;
    for (const Cell& cell : cells) {
        const CellOutcome outcome = run_cell(config, cell, 0, reference, true);
        if (outcome.row.failed()) {
            std::cerr << cell.label() << ": " << outcome.row.status << '\n';
            ++failures;
            continue;
        }
        const TrigBasis basis(support, cell.dimension);
        const std::string tag = cell.label();
        if (oracle_only) {
            const Coefficients& c = *outcome.oracle;
            nlohmann::json doc = {{"coefficients", std::vector<double>(c.data(), c.data() + c.size())},
                                  {"risk", outcome.row.risk_oracle},
                                  {"bias_term", outcome.row.bias_term}};
            write_json(doc, out / ("oracle_" + tag + ".json"));
            write_function_csv(out / ("oracle_" + tag + ".csv"), support, 201,
                               DriftEstimate(basis, c, reference.density), drift.b0, reference.density);
            std::cout << tag << ": oracle risk " << outcome.row.risk_oracle << '\n';
        } else {
            const EstimateResult& result = *outcome.estimate;
            write_json(estimate_to_json(result), out / ("estimate_" + tag + ".json"));
            const DensityModel represented = config.density_mode == DensityMode::known
                                                 ? reference.density
                                                 : estimated_density(*outcome.ensemble, basis, config.estimated_floor);
            write_function_csv(out / ("function_" + tag + ".csv"), support, 201,
                               DriftEstimate(basis, result.reported_coefficients(), represented), drift.b0,
                               reference.density);
            std::cout << tag << ": risk " << outcome.row.risk_fixed_point << " (" << result.iterations
                      << " iterations" << (result.truncated ? ", truncated" : "") << ")\n";
        }
    }
    return failures == cells.size() ? kNumericalFailure : 0;
}

int sweep(const CommonOptions& options, bool dump_paths) {
    const ExperimentConfig config = load_config(options);
    SweepOptions sweep_options;
    sweep_options.out_dir = fs::path(options.out_dir);
    sweep_options.dump_paths = dump_paths;
    const std::vector<RiskRow> rows = risk_sweep(config, sweep_options);
    std::size_t failures = 0;
    for (const auto& row : rows) {
        if (row.failed()) ++failures;
    }
    for (const auto& s : summarize(rows)) {
        std::cout << "N=" << s.n_paths << " T=" << s.horizon << " m=" << s.dimension
                  << "  median risk " << s.median_fixed_point << " (oracle " << s.median_oracle << ")\n";
    }
    if (failures > 0) std::cerr << failures << " of " << rows.size() << " rows failed\n";
    return failures == rows.size() ? kNumericalFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric drift estimation for fractional SDEs"};
    app.require_subcommand(1);

    CommonOptions simulate_options, estimate_options, oracle_options, sweep_options;
    bool dump_paths = false;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one ensemble per cell");
    add_common(simulate_cmd, simulate_options);
    auto* estimate_cmd = app.add_subcommand("estimate", "Fixed-point estimate per cell");
    add_common(estimate_cmd, estimate_options);
    auto* oracle_cmd = app.add_subcommand("oracle", "Oracle estimate per cell (true drift known)");
    add_common(oracle_cmd, oracle_options);
    auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo risk sweep");
    add_common(sweep_cmd, sweep_options);
    sweep_cmd->add_flag("--dump-paths", dump_paths, "Also write every ensemble");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*simulate_cmd) return simulate(simulate_options);
        if (*estimate_cmd) return estimate(estimate_options, false);
        if (*oracle_cmd) return estimate(oracle_options, true);
        return sweep(sweep_options, dump_paths);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
}
