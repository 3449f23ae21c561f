#pragma once

#include "fracdrift/basis.hpp"
#include "fracdrift/estimator.hpp"
#include "fracdrift/sde.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace fracdrift {

/// Decimal text with 17 significant digits, enough for an exact double round trip.
std::string format_double(double value);

/// Columnar CSV (header t,path_0,...; one row per time node) plus a JSON
/// sidecar {H, sigma, T, n_steps, N, drift_id, master_seed}.
void write_ensemble(const SdeEnsemble& ensemble, const std::filesystem::path& csv_path,
                    const std::filesystem::path& sidecar_path);

/// Inverse of write_ensemble. Per-path seeds are re-derived from master_seed.
SdeEnsemble read_ensemble(const std::filesystem::path& csv_path, const std::filesystem::path& sidecar_path);

nlohmann::json estimate_to_json(const EstimateResult& result);
void write_json(const nlohmann::json& document, const std::filesystem::path& path);

/// Rows x, b_tilde(x), b0(x), f(x) on `points` equispaced nodes of I.
void write_function_csv(const std::filesystem::path& path, const IntervalSupport& support,
                        std::size_t points, const RealFunction& estimate, const RealFunction& b0,
                        const RealFunction& density);

}  // namespace fracdrift
