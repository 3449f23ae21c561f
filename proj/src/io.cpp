#include "fracdrift/io.hpp"

#include "fracdrift/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fracdrift {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

}  // namespace

std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void write_ensemble(const SdeEnsemble& ensemble, const std::filesystem::path& csv_path,
                    const std::filesystem::path& sidecar_path) {
    if (ensemble.paths.empty()) throw DomainError("empty ensemble");
    const TimeGrid& grid = ensemble.grid();

    std::ofstream csv = open_output(csv_path);
    csv << "t";
    for (std::size_t i = 0; i < ensemble.size(); ++i) csv << ",path_" << i;
    csv << '\n';
    for (std::size_t k = 0; k < grid.n_nodes(); ++k) {
        csv << format_double(grid.node(k));
        for (const auto& path : ensemble.paths) csv << ',' << format_double(path.values[k]);
        csv << '\n';
    }

    const nlohmann::json sidecar = {
        {"H", ensemble.hurst.value()},
        {"sigma", ensemble.sigma},
        {"T", grid.t_max()},
        {"n_steps", grid.n_steps()},
        {"N", ensemble.size()},
        {"drift_id", ensemble.drift_id},
        {"master_seed", ensemble.master_seed},
    };
    write_json(sidecar, sidecar_path);
}

SdeEnsemble read_ensemble(const std::filesystem::path& csv_path, const std::filesystem::path& sidecar_path) {
    std::ifstream sidecar_in = open_input(sidecar_path);
    const nlohmann::json sidecar = nlohmann::json::parse(sidecar_in);
    const TimeGrid grid(sidecar.at("T").get<double>(), sidecar.at("n_steps").get<std::size_t>());
    const auto n_paths = sidecar.at("N").get<std::size_t>();

    SdeEnsemble ensemble;
    ensemble.hurst = HurstIndex(sidecar.at("H").get<double>());
    ensemble.sigma = sidecar.at("sigma").get<double>();
    ensemble.drift_id = sidecar.at("drift_id").get<std::string>();
    ensemble.master_seed = sidecar.at("master_seed").get<std::uint64_t>();
    ensemble.paths.assign(n_paths, SdePath{grid, std::vector<double>(grid.n_nodes())});
    for (std::size_t i = 0; i < n_paths; ++i) ensemble.seeds.push_back(derive_seed(ensemble.master_seed, i));

    std::ifstream csv = open_input(csv_path);
    std::string line;
    std::getline(csv, line);  // header
    std::size_t k = 0;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        if (k >= grid.n_nodes()) throw std::runtime_error("ensemble CSV has too many rows");
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // t
        for (std::size_t i = 0; i < n_paths; ++i) {
            if (!std::getline(row, cell, ',')) throw std::runtime_error("ensemble CSV row too short");
            ensemble.paths[i].values[k] = std::stod(cell);
        }
        ++k;
    }
    if (k != grid.n_nodes()) throw std::runtime_error("ensemble CSV has too few rows");
    return ensemble;
}

nlohmann::json estimate_to_json(const EstimateResult& result) {
    auto to_vector = [](const Coefficients& c) { return std::vector<double>(c.data(), c.data() + c.size()); };
    nlohmann::json doc = {
        {"theta_star", to_vector(result.theta_star)},
        {"reported_coefficients", to_vector(result.reported_coefficients())},
        {"converged", result.converged},
        {"diverged", result.diverged},
        {"delta_c_holds", result.delta_c_holds},
        {"delta_l_holds", result.delta_l_holds},
        {"truncated", result.truncated},
        {"iterations", result.iterations},
        {"iteration_trace", result.iteration_trace},
        {"contraction_estimate", result.contraction_estimate},
        {"analytic_contraction_bound", result.analytic_contraction_bound},
        {"jacobian_bound", result.jacobian_bound},
        {"max_represented_derivative", result.max_represented_derivative},
        {"max_coefficient_derivative", result.max_coefficient_derivative},
        {"estimated_density", result.estimated_density},
        {"warnings", result.warnings},
    };
    doc["empirical_jacobian"] = result.empirical_jacobian ? nlohmann::json(*result.empirical_jacobian) : nlohmann::json();
    return doc;
}

void write_json(const nlohmann::json& document, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << document.dump(2) << '\n';
}

void write_function_csv(const std::filesystem::path& path, const IntervalSupport& support,
                        std::size_t points, const RealFunction& estimate, const RealFunction& b0,
                        const RealFunction& density) {
    std::ofstream out = open_output(path);
    out << "x,b_tilde,b0,f\n";
    for (std::size_t k = 0; k < points; ++k) {
        const double x = support.point(k, points);
        out << format_double(x) << ',' << format_double(estimate(x)) << ',' << format_double(b0(x)) << ','
            << format_double(density(x)) << '\n';
    }
}

}  // namespace fracdrift
