#include "fracdrift/harness.hpp"

#include "fracdrift/errors.hpp"
#include "fracdrift/io.hpp"
#include "fracdrift/parallel.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace fracdrift {

namespace {

// Stream index reserved for the reference-density ensemble.
constexpr std::uint64_t kReferenceStream = 0x5245464552454e43ULL;

template <typename T>
T get_or(const nlohmann::json& doc, const char* key, T fallback) {
    return doc.contains(key) ? doc.at(key).get<T>() : fallback;
}

void reject_unknown(const nlohmann::json& doc, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : doc.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

std::size_t steps_for(const ExperimentConfig& config, double horizon) {
    if (config.n_steps) return *config.n_steps;
    const auto scaled = static_cast<std::size_t>(std::llround(config.steps_per_unit * horizon));
    return std::max(config.min_steps, scaled);
}

std::string sanitize(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

// strtod keeps subnormals that std::stod rejects as out of range.
double parse_double(const std::string& text) {
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end == text.c_str()) throw std::runtime_error("malformed number '" + text + "' in risk.csv");
    return value;
}

const char* kRiskHeader =
    "N,T,m,replication,risk_fixed_point,risk_oracle,bias_term,V_N_T,delta_c,delta_l,iterations,wall_time,status";

void write_row(std::ostream& out, const RiskRow& row) {
    out << row.n_paths << ',' << format_double(row.horizon) << ',' << row.dimension << ',' << row.replication
        << ',' << format_double(row.risk_fixed_point) << ',' << format_double(row.risk_oracle) << ','
        << format_double(row.bias_term) << ',' << format_double(row.v_n_t) << ',' << (row.delta_c ? 1 : 0)
        << ',' << (row.delta_l ? 1 : 0) << ',' << row.iterations << ',' << format_double(row.wall_time) << ','
        << sanitize(row.status) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
    try {
        const DriftSpec drift = make_drift(drift_id, drift_rate);
        (void)drift;
        const HurstIndex h(hurst);
        if (!h.long_memory()) throw ConfigError("H must exceed 1/2");
        IntervalSupport support(interval_lo, interval_hi);
        (void)support;
        estimator.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (n_paths.empty()) throw ConfigError("N list is empty");
    if (!horizon_rule && horizons.empty()) throw ConfigError("T list is empty");
    if (!dimension_rule && dimensions.empty()) throw ConfigError("m list is empty");
    if (replications < 1) throw ConfigError("replications must be at least 1");
    if (n_steps && *n_steps == 0) throw ConfigError("n_steps must be positive");
    if (!n_steps && !(steps_per_unit > 0.0)) throw ConfigError("steps_per_unit must be positive");
    for (auto n : n_paths) {
        if (n == 0) throw ConfigError("N entries must be positive");
    }
    for (double t : horizons) {
        if (!(t > 0.0)) throw ConfigError("T entries must be positive");
    }
    for (auto m : dimensions) {
        if (m == 0) throw ConfigError("m entries must be positive");
    }
    if (!(estimated_floor > 0.0)) throw ConfigError("estimated_floor must be positive");
    if (reference_paths == 0 || reference_dimension == 0 || !(reference_horizon > 0.0)) {
        throw ConfigError("reference ensemble settings must be positive");
    }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
    ExperimentConfig config;
    try {
        reject_unknown(doc,
                       {"drift", "H", "sigma", "interval", "grid", "N", "T", "m", "replications", "seed", "init",
                        "fbm_method", "estimator", "density_mode", "estimated_floor", "reference"},
                       "config");
        if (doc.contains("drift")) {
            const auto& drift = doc.at("drift");
            if (drift.is_string()) {
                config.drift_id = drift.get<std::string>();
            } else {
                reject_unknown(drift, {"id", "rate"}, "drift");
                config.drift_id = get_or<std::string>(drift, "id", config.drift_id);
                config.drift_rate = get_or(drift, "rate", config.drift_rate);
            }
        }
        config.hurst = get_or(doc, "H", config.hurst);
        config.sigma = get_or(doc, "sigma", config.sigma);
        if (doc.contains("interval")) {
            const auto bounds = doc.at("interval").get<std::vector<double>>();
            if (bounds.size() != 2) throw ConfigError("interval must be [lo, hi]");
            config.interval_lo = bounds[0];
            config.interval_hi = bounds[1];
        }
        if (doc.contains("grid")) {
            const auto& grid = doc.at("grid");
            reject_unknown(grid, {"n_steps", "steps_per_unit", "min_steps"}, "grid");
            if (grid.contains("n_steps")) config.n_steps = grid.at("n_steps").get<std::size_t>();
            config.steps_per_unit = get_or(grid, "steps_per_unit", config.steps_per_unit);
            config.min_steps = get_or(grid, "min_steps", config.min_steps);
        }
        if (doc.contains("N")) config.n_paths = doc.at("N").get<std::vector<std::size_t>>();
        if (doc.contains("T")) {
            const auto& t = doc.at("T");
            if (t.is_array()) {
                config.horizons = t.get<std::vector<double>>();
            } else if (t.is_number()) {
                config.horizons = {t.get<double>()};
            } else {
                reject_unknown(t, {"rule", "scale"}, "T");
                if (t.at("rule").get<std::string>() != "N^(-1/(4H))") {
                    throw ConfigError("unsupported T rule (expected \"N^(-1/(4H))\")");
                }
                config.horizon_rule = HorizonRule{get_or(t, "scale", 1.0)};
            }
        }
        if (doc.contains("m")) {
            const auto& m = doc.at("m");
            if (m.is_array()) {
                config.dimensions = m.get<std::vector<std::size_t>>();
            } else if (m.is_number()) {
                config.dimensions = {m.get<std::size_t>()};
            } else {
                reject_unknown(m, {"rule", "beta", "scale"}, "m");
                if (m.at("rule").get<std::string>() != "N^((2H-1)/(4H(3+2beta)))") {
                    throw ConfigError("unsupported m rule (expected \"N^((2H-1)/(4H(3+2beta)))\")");
                }
                config.dimension_rule = DimensionRule{get_or(m, "beta", 1.0), get_or(m, "scale", 1.0)};
            }
        }
        config.replications = get_or(doc, "replications", config.replications);
        config.seed = get_or(doc, "seed", config.seed);
        if (doc.contains("init")) {
            const auto& init = doc.at("init");
            reject_unknown(init, {"mode", "burn_multiplier", "x0"}, "init");
            const auto mode = init.at("mode").get<std::string>();
            if (mode == "stationary") {
                config.init = StationaryStart{get_or(init, "burn_multiplier", 10.0)};
            } else if (mode == "fixed") {
                config.init = FixedStart{get_or(init, "x0", 0.0)};
            } else {
                throw ConfigError("init mode must be \"stationary\" or \"fixed\"");
            }
        }
        if (doc.contains("fbm_method")) {
            const auto method = doc.at("fbm_method").get<std::string>();
            if (method == "circulant") {
                config.method = FbmMethod::circulant;
            } else if (method == "cholesky") {
                config.method = FbmMethod::cholesky;
            } else {
                throw ConfigError("fbm_method must be \"circulant\" or \"cholesky\"");
            }
        }
        if (doc.contains("estimator")) {
            const auto& e = doc.at("estimator");
            reject_unknown(e,
                           {"c_bound", "l_target", "max_iter", "tol", "quadrature_points", "sup_grid_points",
                            "empirical_jacobian"},
                           "estimator");
            EstimatorConfig& est = config.estimator;
            est.c_bound = get_or(e, "c_bound", est.c_bound);
            est.l_target = get_or(e, "l_target", est.l_target);
            est.max_iter = get_or(e, "max_iter", est.max_iter);
            est.tol = get_or(e, "tol", est.tol);
            est.quadrature_points = get_or(e, "quadrature_points", est.quadrature_points);
            est.sup_grid_points = get_or(e, "sup_grid_points", est.sup_grid_points);
            est.empirical_jacobian = get_or(e, "empirical_jacobian", est.empirical_jacobian);
        }
        if (doc.contains("density_mode")) {
            const auto mode = doc.at("density_mode").get<std::string>();
            if (mode == "known") {
                config.density_mode = DensityMode::known;
            } else if (mode == "estimated") {
                config.density_mode = DensityMode::estimated;
            } else {
                throw ConfigError("density_mode must be \"known\" or \"estimated\"");
            }
        }
        config.estimated_floor = get_or(doc, "estimated_floor", config.estimated_floor);
        if (doc.contains("reference")) {
            const auto& r = doc.at("reference");
            reject_unknown(r, {"paths", "m", "T"}, "reference");
            config.reference_paths = get_or(r, "paths", config.reference_paths);
            config.reference_dimension = get_or(r, "m", config.reference_dimension);
            config.reference_horizon = get_or(r, "T", config.reference_horizon);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    config.validate();
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Cells

std::string Cell::label() const {
    std::ostringstream out;
    out << "N" << n_paths << "_T" << horizon << "_m" << dimension;
    return out.str();
}

std::vector<Cell> expand_cells(const ExperimentConfig& config) {
    std::vector<Cell> cells;
    for (std::size_t n : config.n_paths) {
        const double nd = static_cast<double>(n);
        std::vector<double> horizons = config.horizons;
        if (config.horizon_rule) horizons = {config.horizon_rule->scale * std::pow(nd, -1.0 / (4.0 * config.hurst))};
        std::vector<std::size_t> dimensions = config.dimensions;
        if (config.dimension_rule) {
            const double h = config.hurst;
            const double exponent = (2.0 * h - 1.0) / (4.0 * h * (3.0 + 2.0 * config.dimension_rule->beta));
            const double m = config.dimension_rule->scale * std::pow(nd, exponent);
            dimensions = {std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(m)))};
        }
        for (double t : horizons) {
            for (std::size_t m : dimensions) cells.push_back(Cell{n, t, m, steps_for(config, t)});
        }
    }
    return cells;
}

double V_N_T(std::size_t n_paths, double horizon, double hurst) {
    return 1.0 / (std::sqrt(static_cast<double>(n_paths)) * horizon) + std::pow(horizon, 2.0 * hurst - 1.0);
}

// ---------------------------------------------------------------------------
// Single runs

ReferenceDensity reference_density(const ExperimentConfig& config) {
    const DriftSpec drift = make_drift(config.drift_id, config.drift_rate);
    const IntervalSupport support(config.interval_lo, config.interval_hi);
    const HurstIndex hurst(config.hurst);
    if (drift.linear_rate && std::holds_alternative<StationaryStart>(config.init)) {
        const double variance = fou_stationary_variance(*drift.linear_rate, config.sigma, hurst);
        return {DensityModel::gaussian(variance, support), true};
    }
    const Cell cell{config.reference_paths, config.reference_horizon, config.reference_dimension,
                    steps_for(config, config.reference_horizon)};
    const SdeEnsemble ensemble = simulate_ensemble(ensemble_config(config, cell, derive_seed(config.seed, kReferenceStream)));
    const TrigBasis basis(support, config.reference_dimension);
    return {estimated_density(ensemble, basis, config.estimated_floor), false};
}

std::uint64_t replication_seed(std::uint64_t master, const Cell& cell, std::size_t replication) {
    const std::uint64_t by_n = derive_seed(master, cell.n_paths);
    const std::uint64_t by_t = derive_seed(by_n, std::bit_cast<std::uint64_t>(cell.horizon));
    return derive_seed(by_t, replication);
}

SdeConfig ensemble_config(const ExperimentConfig& config, const Cell& cell, std::uint64_t seed) {
    SdeConfig sde;
    sde.drift = make_drift(config.drift_id, config.drift_rate);
    sde.sigma = config.sigma;
    sde.hurst = HurstIndex(config.hurst);
    sde.grid = TimeGrid(cell.horizon, cell.n_steps);
    sde.n_paths = cell.n_paths;
    sde.seed = seed;
    sde.init = config.init;
    sde.method = config.method;
    return sde;
}

CellOutcome run_cell(const ExperimentConfig& config, const Cell& cell, std::size_t replication,
                     const ReferenceDensity& reference, bool keep_ensemble) {
    const auto start = std::chrono::steady_clock::now();
    CellOutcome outcome;
    RiskRow& row = outcome.row;
    row.n_paths = cell.n_paths;
    row.horizon = cell.horizon;
    row.dimension = cell.dimension;
    row.replication = replication;
    row.v_n_t = V_N_T(cell.n_paths, cell.horizon, config.hurst);

    try {
        const SdeConfig sde = ensemble_config(config, cell, replication_seed(config.seed, cell, replication));
        SdeEnsemble ensemble = simulate_ensemble(sde);
        const IntervalSupport support(config.interval_lo, config.interval_hi);
        const TrigBasis basis(support, cell.dimension);
        const KernelGrid kernel(ensemble.grid(), ensemble.hurst);
        const EnsembleFunctionals functionals(ensemble, basis, kernel);
        const DensityModel& f = reference.density;
        const std::size_t qp = config.estimator.quadrature_points;

        row.bias_term = projection_bias(sde.drift.b0, f, basis, qp);

        const Coefficients oracle = oracle_hat_b(ensemble, basis, kernel, sde.drift);
        row.risk_oracle = weighted_l2_error(DriftEstimate(basis, oracle, f), sde.drift.b0, f, support, qp);

        EstimateResult estimate =
            practical_estimate(functionals, config.estimator, config.density_mode, f, config.estimated_floor);
        const DensityModel represented = config.density_mode == DensityMode::known
                                             ? f
                                             : estimated_density(ensemble, basis, config.estimated_floor);
        row.risk_fixed_point = weighted_l2_error(DriftEstimate(basis, estimate.reported_coefficients(), represented),
                                                 sde.drift.b0, f, support, qp);
        row.delta_c = estimate.delta_c_holds;
        row.delta_l = estimate.delta_l_holds;
        row.iterations = estimate.iterations;
        if (estimate.diverged) row.status = "diverged";

        outcome.estimate = std::move(estimate);
        outcome.oracle = oracle;
        if (keep_ensemble) outcome.ensemble = std::move(ensemble);
    } catch (const std::exception& e) {
        row.status = e.what();
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return outcome;
}

RiskRow run_estimate(const ExperimentConfig& config, const Cell& cell, std::size_t replication) {
    return run_cell(config, cell, replication, reference_density(config)).row;
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<RiskRow> risk_sweep(const ExperimentConfig& config, const SweepOptions& options) {
    config.validate();
    const std::vector<Cell> cells = expand_cells(config);
    const ReferenceDensity reference = reference_density(config);
    const std::size_t reps = config.replications;
    const std::size_t tasks = cells.size() * reps;

    std::ofstream sink;
    if (options.out_dir) {
        std::filesystem::create_directories(*options.out_dir);
        sink.open(*options.out_dir / "risk.csv");
        if (!sink) throw std::runtime_error("cannot open risk.csv for writing");
        sink << kRiskHeader << '\n' << std::flush;
    }

    std::vector<std::optional<RiskRow>> slots(tasks);
    std::size_t next_to_write = 0;
    std::mutex sink_mutex;

    parallel_for(tasks, [&](std::size_t task) {
        const Cell& cell = cells[task / reps];
        const std::size_t rep = task % reps;
        CellOutcome outcome = run_cell(config, cell, rep, reference, options.dump_paths);
        if (options.out_dir) {
            const std::string tag = cell.label() + "_r" + std::to_string(rep);
            if (options.write_estimates && outcome.estimate) {
                write_json(estimate_to_json(*outcome.estimate), *options.out_dir / ("estimate_" + tag + ".json"));
            }
            if (outcome.ensemble) {
                write_ensemble(*outcome.ensemble, *options.out_dir / ("ensemble_" + tag + ".csv"),
                               *options.out_dir / ("ensemble_" + tag + ".json"));
            }
        }
        std::lock_guard lock(sink_mutex);
        slots[task] = std::move(outcome.row);
        if (!options.out_dir) return;
        while (next_to_write < tasks && slots[next_to_write]) write_row(sink, *slots[next_to_write++]);
        sink.flush();
    });

    std::vector<RiskRow> rows;
    rows.reserve(tasks);
    for (auto& slot : slots) rows.push_back(std::move(*slot));
    if (options.out_dir) write_summary_csv(summarize(rows), *options.out_dir / "risk_summary.csv");
    return rows;
}

double median(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<CellSummary> summarize(const std::vector<RiskRow>& rows) {
    using Key = std::tuple<std::size_t, double, std::size_t>;
    std::vector<Key> order;
    std::map<Key, std::vector<const RiskRow*>> groups;
    for (const auto& row : rows) {
        const Key key{row.n_paths, row.horizon, row.dimension};
        if (!groups.contains(key)) order.push_back(key);
        groups[key].push_back(&row);
    }
    std::vector<CellSummary> summary;
    for (const auto& key : order) {
        CellSummary s;
        std::tie(s.n_paths, s.horizon, s.dimension) = key;
        std::vector<double> fixed, oracle;
        std::size_t truncated = 0;
        for (const RiskRow* row : groups[key]) {
            s.v_n_t = row->v_n_t;
            if (row->failed()) continue;
            fixed.push_back(row->risk_fixed_point);
            oracle.push_back(row->risk_oracle);
            s.bias_term = row->bias_term;
            if (!(row->delta_c && row->delta_l)) ++truncated;
        }
        s.rows = fixed.size();
        if (!fixed.empty()) {
            auto mean = [](const std::vector<double>& v) {
                double acc = 0.0;
                for (double x : v) acc += x;
                return acc / static_cast<double>(v.size());
            };
            s.median_fixed_point = median(fixed);
            s.mean_fixed_point = mean(fixed);
            s.median_oracle = median(oracle);
            s.mean_oracle = mean(oracle);
            s.truncation_rate = static_cast<double>(truncated) / static_cast<double>(fixed.size());
        }
        summary.push_back(s);
    }
    return summary;
}

void write_risk_csv(const std::vector<RiskRow>& rows, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << kRiskHeader << '\n';
    for (const auto& row : rows) write_row(out, row);
}

std::vector<RiskRow> read_risk_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kRiskHeader) throw std::runtime_error("unexpected risk.csv header");
    std::vector<RiskRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::vector<std::string> cell;
        std::string field;
        while (std::getline(fields, field, ',')) cell.push_back(field);
        if (cell.size() != 13) throw std::runtime_error("malformed risk.csv row: " + line);
        RiskRow row;
        row.n_paths = std::stoull(cell[0]);
        row.horizon = parse_double(cell[1]);
        row.dimension = std::stoull(cell[2]);
        row.replication = std::stoull(cell[3]);
        row.risk_fixed_point = parse_double(cell[4]);
        row.risk_oracle = parse_double(cell[5]);
        row.bias_term = parse_double(cell[6]);
        row.v_n_t = parse_double(cell[7]);
        row.delta_c = cell[8] == "1";
        row.delta_l = cell[9] == "1";
        row.iterations = std::stoull(cell[10]);
        row.wall_time = parse_double(cell[11]);
        row.status = cell[12];
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_summary_csv(const std::vector<CellSummary>& summary, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "N,T,m,rows,median_risk_fixed_point,mean_risk_fixed_point,median_risk_oracle,mean_risk_oracle,"
           "bias_term,V_N_T,truncation_rate\n";
    for (const auto& s : summary) {
        out << s.n_paths << ',' << format_double(s.horizon) << ',' << s.dimension << ',' << s.rows << ','
            << format_double(s.median_fixed_point) << ',' << format_double(s.mean_fixed_point) << ','
            << format_double(s.median_oracle) << ',' << format_double(s.mean_oracle) << ','
            << format_double(s.bias_term) << ',' << format_double(s.v_n_t) << ','
            << format_double(s.truncation_rate) << '\n';
    }
}

}  // namespace fracdrift
