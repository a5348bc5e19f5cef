#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "tinet/certify.hpp"
#include "tinet/errors.hpp"
#include "tinet/network.hpp"
#include "tinet/phonon.hpp"
#include "tinet/simulate.hpp"

namespace tinet::io {

using Json = nlohmann::ordered_json;

/// Model-file parse failure. path() is a JSON pointer into the document.
class ParseError : public InvalidArgument {
public:
    ParseError(std::string path, const std::string& message);

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

Json stencil_to_json(const MatrixStencil& stencil);
MatrixStencil stencil_from_json(const Json& j, const std::string& path = "");

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& path = "");

enum class StorageKind { none, stencil, lyapunov, hamiltonian };

/// In-memory form of a schema-1 model file.
struct ModelFile {
    NetworkModel model;
    /// Set for Hamiltonian presets and (M, K) specs.
    std::optional<HamiltonianSpec> hamiltonian;
    /// Momentum damping applied on top of the Hamiltonian, 0 when lossless.
    double gamma = 0.0;
    StorageKind storage_kind = StorageKind::none;
    /// The storage stencil for StorageKind::stencil and ::hamiltonian.
    std::optional<StorageSpec> storage;
    std::optional<SupplySpec> supply;

    friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

/// Accepted layouts (all with "schema": 1):
///   {"nu", "n", "m", "r", "a", "b", "c", "d"}           explicit stencils
///   {"preset": "chain" | "plate", "params": {...}}       built-in networks
///   {"hamiltonian": {"mass", "stiffness"}, ...}          (M, K) spec
/// with optional "storage" (stencil | "lyapunov" | "hamiltonian") and
/// "supply" (stencil | [stencil, ...] | "identity" | "derivative").
ModelFile parse_model(const Json& doc);
ModelFile load_model(const std::string& path);

/// Canonical explicit form: re-parses to an equal ModelFile and is
/// byte-stable under repeated export.
Json export_model(const ModelFile& file);

Json grid_to_json(const TorusGrid& grid);
Json report_to_json(const CertificationReport& report);
Json margin_to_json(const StabilityMargin& margin);
Json longwave_to_json(const LongWaveReport& report);
Json phase_velocity_to_json(const PhaseVelocity& velocity);

/// sigma_1..sigma_nu, omega_1..omega_{n/2}, psd_flag
void write_dispersion_csv(std::ostream& out, const DispersionSurface& surface);

/// time, x_norm, y_norm, u_norm, H, S, residual (S - dH/dt). Columns without
/// a configured storage or supply are written as nan.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);

/// Row-major little-endian float64 dump of the recorded states and a JSON
/// sidecar at `path` + ".json" describing the shape.
void write_state_dump(const std::string& path, const SimulationTrace& trace);

/// Number formatting shared by the CSV writers (17 significant digits).
std::string format_number(double value);

}  // namespace tinet::io
