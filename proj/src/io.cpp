#include "tinet/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "tinet/errors.hpp"
#include "tinet/models.hpp"

namespace tinet::io {

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

[[noreturn]] void fail(const std::string& path, const std::string& message) { throw ParseError(path, message); }

const Json& require(const Json& obj, const std::string& key, const std::string& path)
{
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(child(path, key), "missing required field");
    return *it;
}

void allow_keys(const Json& obj, std::initializer_list<const char*> keys, const std::string& path)
{
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
            fail(child(path, it.key()), "unknown field");
    }
}

double as_number(const Json& j, const std::string& path)
{
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const Json& j, const std::string& path)
{
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::string as_string(const Json& j, const std::string& path)
{
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

double number_or(const Json& obj, const char* key, double fallback, const std::string& path)
{
    auto it = obj.find(key);
    return it == obj.end() ? fallback : as_number(*it, child(path, key));
}

Json number(double value)
{
    if (std::isfinite(value)) return value;
    if (std::isnan(value)) return "nan";
    return value > 0 ? "inf" : "-inf";
}

Json vector_json(const Eigen::VectorXd& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
    return out;
}

// Rewraps library errors raised while building objects so they carry a path.
template <typename Fn>
auto at_path(const std::string& path, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

void expect_shape(const MatrixStencil& s, int nu, int rows, int cols, const std::string& path)
{
    if (s.nu() != nu) fail(child(path, "nu"), "stencil nu " + std::to_string(s.nu()) + " != model nu " + std::to_string(nu));
    if (s.rows() != rows || s.cols() != cols)
        fail(path, "stencil is " + std::to_string(s.rows()) + " x " + std::to_string(s.cols()) + ", expected " +
                       std::to_string(rows) + " x " + std::to_string(cols));
}

models::Sensing parse_sensing(const Json& doc, const std::string& path)
{
    auto it = doc.find("sensing");
    if (it == doc.end()) return models::Sensing::velocity;
    const std::string s = as_string(*it, child(path, "sensing"));
    if (s == "velocity") return models::Sensing::velocity;
    if (s == "position") return models::Sensing::position;
    fail(child(path, "sensing"), "expected \"velocity\" or \"position\", got \"" + s + "\"");
}

HamiltonianSpec parse_preset(const Json& doc, double& gamma)
{
    const std::string preset = as_string(require(doc, "preset", ""), "/preset");
    const Json empty = Json::object();
    auto pit = doc.find("params");
    const Json& params = pit == doc.end() ? empty : *pit;
    const std::string path = "/params";
    if (preset == "chain") {
        allow_keys(params, {"mass", "kappa", "gamma", "pinning"}, path);
        models::ChainParams p;
        p.mass = number_or(params, "mass", 1.0, path);
        p.kappa = number_or(params, "kappa", 1.0, path);
        gamma = number_or(params, "gamma", 0.0, path);
        const double pinning = number_or(params, "pinning", 0.0, path);
        return at_path(path, [&] {
            HamiltonianSpec spec = models::chain_spec(p);
            return pinning != 0.0 ? models::pinned(spec, pinning) : spec;
        });
    }
    if (preset == "plate") {
        allow_keys(params, {"rho", "beta", "h", "gamma", "pinning"}, path);
        models::PlateParams p;
        p.rho = number_or(params, "rho", 1.0, path);
        p.beta = number_or(params, "beta", 1.0, path);
        p.h = number_or(params, "h", 1.0, path);
        gamma = number_or(params, "gamma", 0.0, path);
        const double pinning = number_or(params, "pinning", 0.0, path);
        return at_path(path, [&] {
            HamiltonianSpec spec = models::plate_spec(p);
            return pinning != 0.0 ? models::pinned(spec, pinning) : spec;
        });
    }
    fail("/preset", "unknown preset \"" + preset + "\" (expected \"chain\" or \"plate\")");
}

HamiltonianSpec parse_hamiltonian(const Json& section, double& gamma)
{
    const std::string path = "/hamiltonian";
    allow_keys(section, {"mass", "stiffness", "gamma"}, path);
    Eigen::MatrixXd mass = matrix_from_json(require(section, "mass", path), child(path, "mass"));
    MatrixStencil stiffness = stencil_from_json(require(section, "stiffness", path), child(path, "stiffness"));
    gamma = number_or(section, "gamma", 0.0, path);
    return at_path(path, [&] { return HamiltonianSpec(std::move(mass), std::move(stiffness)); });
}

NetworkModel parse_explicit(const Json& doc)
{
    const int nu = as_int(require(doc, "nu", ""), "/nu");
    const int n = as_int(require(doc, "n", ""), "/n");
    MatrixStencil a = stencil_from_json(require(doc, "a", ""), "/a");
    expect_shape(a, nu, n, n, "/a");
    const bool has_io = doc.contains("b") || doc.contains("c") || doc.contains("d");
    if (!has_io) {
        if (doc.contains("m") || doc.contains("r")) fail("/b", "m and r given without b, c, d stencils");
        return NetworkModel::autonomous(std::move(a));
    }
    const int m = as_int(require(doc, "m", ""), "/m");
    const int r = as_int(require(doc, "r", ""), "/r");
    MatrixStencil b = stencil_from_json(require(doc, "b", ""), "/b");
    MatrixStencil c = stencil_from_json(require(doc, "c", ""), "/c");
    MatrixStencil d = stencil_from_json(require(doc, "d", ""), "/d");
    expect_shape(b, nu, n, m, "/b");
    expect_shape(c, nu, r, n, "/c");
    expect_shape(d, nu, r, m, "/d");
    return at_path("", [&] { return NetworkModel(std::move(a), std::move(b), std::move(c), std::move(d)); });
}

SupplySpec parse_supply(const Json& j, const NetworkModel& model)
{
    const std::string path = "/supply";
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (model.m() != model.r())
            fail(path, "\"" + s + "\" supply needs m = r, model has m = " + std::to_string(model.m()) +
                           ", r = " + std::to_string(model.r()));
        if (s == "identity") return SupplySpec::identity(model.nu(), model.m());
        if (s == "derivative") return SupplySpec::derivative(model.nu(), model.m());
        fail(path, "expected a stencil, a list of stencils, \"identity\" or \"derivative\"");
    }
    std::vector<MatrixStencil> coefficients;
    if (j.is_array()) {
        if (j.empty()) fail(path, "supply coefficient list is empty");
        for (std::size_t i = 0; i < j.size(); ++i) coefficients.push_back(stencil_from_json(j[i], child(path, i)));
    } else {
        coefficients.push_back(stencil_from_json(j, path));
    }
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        expect_shape(coefficients[i], model.nu(), model.m(), model.r(), j.is_array() ? child(path, i) : path);
    return at_path(path, [&] { return SupplySpec(std::move(coefficients)); });
}

}  // namespace

ParseError::ParseError(std::string path, const std::string& message)
    : InvalidArgument("model file " + (path.empty() ? std::string("/") : path) + ": " + message), path_(std::move(path))
{
}

Json matrix_to_json(const Eigen::MatrixXd& m)
{
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) fail(child(path, 0), "expected a non-empty array of numbers");
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string row_path = child(path, i);
        if (!j[i].is_array()) fail(row_path, "expected an array of numbers");
        if (j[i].size() != cols)
            fail(row_path, "row has " + std::to_string(j[i].size()) + " entries, expected " + std::to_string(cols));
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = as_number(j[i][k], child(row_path, k));
    }
    return m;
}

Json stencil_to_json(const MatrixStencil& stencil)
{
    Json out;
    out["nu"] = stencil.nu();
    out["rows"] = stencil.rows();
    out["cols"] = stencil.cols();
    Json blocks = Json::array();
    for (const auto& [offset, block] : stencil.blocks()) {
        Json entry;
        entry["offset"] = offset;
        entry["matrix"] = matrix_to_json(block);
        blocks.push_back(std::move(entry));
    }
    out["blocks"] = std::move(blocks);
    return out;
}

MatrixStencil stencil_from_json(const Json& j, const std::string& path)
{
    allow_keys(j, {"nu", "rows", "cols", "blocks"}, path);
    const int nu = as_int(require(j, "nu", path), child(path, "nu"));
    const int rows = as_int(require(j, "rows", path), child(path, "rows"));
    const int cols = as_int(require(j, "cols", path), child(path, "cols"));
    if (nu < 1) fail(child(path, "nu"), "nu must be positive");
    if (rows < 1 || cols < 1) fail(path, "rows and cols must be positive");
    MatrixStencil s(nu, rows, cols);
    const Json& blocks = require(j, "blocks", path);
    const std::string blocks_path = child(path, "blocks");
    if (!blocks.is_array()) fail(blocks_path, "expected an array");
    std::set<Offset> seen;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const std::string bp = child(blocks_path, b);
        allow_keys(blocks[b], {"offset", "matrix"}, bp);
        const Json& off = require(blocks[b], "offset", bp);
        if (!off.is_array() || static_cast<int>(off.size()) != nu)
            fail(child(bp, "offset"), "expected an integer array of length " + std::to_string(nu));
        Offset offset(nu);
        for (int a = 0; a < nu; ++a) offset[a] = as_int(off[a], child(child(bp, "offset"), a));
        if (!seen.insert(offset).second) fail(child(bp, "offset"), "duplicate offset");
        Eigen::MatrixXd m = matrix_from_json(require(blocks[b], "matrix", bp), child(bp, "matrix"));
        if (m.rows() != rows || m.cols() != cols)
            fail(child(bp, "matrix"), "block is " + std::to_string(m.rows()) + " x " + std::to_string(m.cols()) +
                                          ", expected " + std::to_string(rows) + " x " + std::to_string(cols));
        s.set(offset, m);
    }
    return s;
}

ModelFile parse_model(const Json& doc)
{
    if (!doc.is_object()) fail("", "expected a JSON object");
    const Json& schema = require(doc, "schema", "");
    if (!schema.is_number_integer() || schema.get<int>() != 1) fail("/schema", "unsupported schema (expected 1)");
    allow_keys(doc,
               {"schema", "preset", "params", "sensing", "hamiltonian", "nu", "n", "m", "r", "a", "b", "c", "d",
                "storage", "supply"},
               "");

    std::optional<NetworkModel> model;
    ModelFile file{NetworkModel::autonomous(MatrixStencil(1, 1, 1)), std::nullopt, 0.0, StorageKind::none,
                   std::nullopt, std::nullopt};
    if (doc.contains("preset")) {
        for (const char* key : {"hamiltonian", "a", "b", "c", "d", "nu", "n", "m", "r"})
            if (doc.contains(key)) fail(child("", key), "not allowed together with a preset");
        file.hamiltonian = parse_preset(doc, file.gamma);
    } else {
        if (doc.contains("params")) fail("/params", "params are only used with a preset");
        if (doc.contains("hamiltonian")) file.hamiltonian = parse_hamiltonian(doc["hamiltonian"], file.gamma);
        if (doc.contains("a")) {
            model = parse_explicit(doc);
            if (doc.contains("sensing")) fail("/sensing", "sensing applies to Hamiltonian specs only");
            if (file.hamiltonian && (file.hamiltonian->nu() != model->nu() || 2 * file.hamiltonian->dof() != model->n()))
                fail("/hamiltonian", "Hamiltonian spec does not match the model dimensions");
        } else if (!file.hamiltonian) {
            fail("", "expected explicit stencils (\"a\"), a \"preset\" or a \"hamiltonian\" spec");
        }
    }
    if (file.gamma < 0.0) fail(doc.contains("preset") ? "/params/gamma" : "/hamiltonian/gamma", "gamma must be nonnegative");
    if (!model) {
        const models::Sensing sensing = parse_sensing(doc, "");
        model = models::actuated_hamiltonian(*file.hamiltonian, file.gamma, sensing);
    }
    file.model = std::move(*model);

    if (auto it = doc.find("storage"); it != doc.end()) {
        const Json& s = *it;
        if (s.is_string()) {
            const std::string kind = s.get<std::string>();
            if (kind == "lyapunov") {
                file.storage_kind = StorageKind::lyapunov;
            } else if (kind == "hamiltonian") {
                if (!file.hamiltonian) fail("/storage", "\"hamiltonian\" storage needs a Hamiltonian model");
                file.storage_kind = StorageKind::hamiltonian;
                file.storage = hamiltonian_storage(*file.hamiltonian);
            } else {
                fail("/storage", "expected a stencil, \"lyapunov\" or \"hamiltonian\"");
            }
        } else {
            MatrixStencil v = stencil_from_json(s, "/storage");
            expect_shape(v, file.model.nu(), file.model.n(), file.model.n(), "/storage");
            file.storage_kind = StorageKind::stencil;
            file.storage = at_path("/storage", [&] { return StorageSpec(std::move(v)); });
        }
    }
    if (auto it = doc.find("supply"); it != doc.end()) file.supply = parse_supply(*it, file.model);
    return file;
}

ModelFile load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open model file " + path);
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("malformed JSON in " + path + ": " + e.what());
    }
    return parse_model(doc);
}

Json export_model(const ModelFile& file)
{
    Json out;
    out["schema"] = 1;
    const NetworkModel& m = file.model;
    out["nu"] = m.nu();
    out["n"] = m.n();
    out["m"] = m.m();
    out["r"] = m.r();
    out["a"] = stencil_to_json(m.a());
    out["b"] = stencil_to_json(m.b());
    out["c"] = stencil_to_json(m.c());
    out["d"] = stencil_to_json(m.d());
    if (file.hamiltonian) {
        Json h;
        h["mass"] = matrix_to_json(file.hamiltonian->mass());
        h["stiffness"] = stencil_to_json(file.hamiltonian->stiffness());
        h["gamma"] = file.gamma;
        out["hamiltonian"] = std::move(h);
    }
    switch (file.storage_kind) {
    case StorageKind::none: break;
    case StorageKind::lyapunov: out["storage"] = "lyapunov"; break;
    case StorageKind::hamiltonian: out["storage"] = "hamiltonian"; break;
    case StorageKind::stencil: out["storage"] = stencil_to_json(file.storage->v()); break;
    }
    if (file.supply) {
        if (file.supply->coefficients().size() == 1) {
            out["supply"] = stencil_to_json(file.supply->static_part());
        } else {
            Json list = Json::array();
            for (const auto& c : file.supply->coefficients()) list.push_back(stencil_to_json(c));
            out["supply"] = std::move(list);
        }
    }
    return out;
}

Json grid_to_json(const TorusGrid& grid)
{
    Json out;
    out["nu"] = grid.nu();
    out["points_per_axis"] = grid.points_per_axis();
    return out;
}

Json report_to_json(const CertificationReport& report)
{
    Json out;
    out["property"] = to_string(report.property);
    out["verdict"] = report.verdict;
    out["margin"] = report.margin ? number(*report.margin) : Json(nullptr);
    if (report.witness) {
        Json w;
        if (report.witness->omega) w["omega"] = number(*report.witness->omega);
        w["sigma"] = vector_json(report.witness->sigma);
        w["lambda_min"] = number(report.witness->lambda_min);
        out["witness"] = std::move(w);
    } else {
        out["witness"] = nullptr;
    }
    out["grid"] = grid_to_json(report.grid);
    if (report.sweep) {
        Json s;
        s["description"] = report.sweep->description;
        s["points"] = report.sweep->omegas.size();
        if (!report.sweep->omegas.empty()) {
            const auto [lo, hi] = std::minmax_element(report.sweep->omegas.begin(), report.sweep->omegas.end());
            s["omega_min"] = number(*lo);
            s["omega_max"] = number(*hi);
        }
        s["include_limit"] = report.sweep->include_limit;
        out["omega_sweep"] = std::move(s);
    } else {
        out["omega_sweep"] = nullptr;
    }
    Json sides = Json::array();
    for (const auto& c : report.side_conditions) {
        Json entry;
        entry["name"] = c.name;
        entry["pass"] = c.pass;
        entry["detail"] = c.detail;
        sides.push_back(std::move(entry));
    }
    out["side_conditions"] = std::move(sides);
    if (!report.reason.empty()) out["reason"] = report.reason;
    return out;
}

Json margin_to_json(const StabilityMargin& margin)
{
    Json out;
    out["mu"] = number(margin.mu);
    out["v_norm"] = number(margin.v_norm);
    out["condition_number"] = number(margin.condition_number);
    out["bound_factor"] = number(margin.bound_factor);
    out["mu_sigma"] = vector_json(margin.mu_sigma);
    out["v_norm_sigma"] = vector_json(margin.v_norm_sigma);
    return out;
}

Json longwave_to_json(const LongWaveReport& report)
{
    Json out;
    Json gamma = Json::array();
    for (const auto& row : report.gamma) {
        Json r = Json::array();
        for (const auto& g : row) r.push_back(matrix_to_json(g));
        gamma.push_back(std::move(r));
    }
    out["gamma"] = std::move(gamma);
    out["longwave_speed"] = number(report.longwave_speed);
    out["sum_zero_residual"] = number(report.sum_zero_residual);
    out["second_moment"] = number(report.second_moment);
    out["min_directional_eigenvalue"] = number(report.min_directional_eigenvalue);
    out["sphere_samples"] = report.sphere_samples;
    return out;
}

Json phase_velocity_to_json(const PhaseVelocity& velocity)
{
    Json out;
    out["value"] = number(velocity.value);
    out["grid_value"] = number(velocity.grid_value);
    out["longwave_speed"] = number(velocity.longwave_speed);
    out["grid_witness"] = vector_json(velocity.grid_witness);
    out["attained_in_limit"] = velocity.attained_in_limit;
    out["hypotheses_met"] = velocity.hypotheses_met;
    if (!velocity.note.empty()) out["note"] = velocity.note;
    return out;
}

std::string format_number(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_dispersion_csv(std::ostream& out, const DispersionSurface& surface)
{
    const int nu = surface.grid.nu();
    for (int a = 0; a < nu; ++a) out << "sigma_" << a + 1 << ',';
    const Eigen::Index branches = surface.branches.empty() ? 0 : surface.branches.front().size();
    for (Eigen::Index b = 0; b < branches; ++b) out << "omega_" << b + 1 << ',';
    out << "psd_flag\n";
    for (std::size_t k = 0; k < surface.grid.size(); ++k) {
        const Eigen::VectorXd sigma = surface.grid.node(k);
        for (int a = 0; a < nu; ++a) out << format_number(sigma[a]) << ',';
        for (Eigen::Index b = 0; b < branches; ++b) out << format_number(surface.branches[k][b]) << ',';
        out << (surface.psd_flags[k] ? 1 : 0) << '\n';
    }
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out << "time,x_norm,y_norm,u_norm,H,S,residual\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double h = trace.hamiltonian.empty() ? nan : trace.hamiltonian[i];
        const double s = trace.supply_rate.empty() ? nan : trace.supply_rate[i];
        const double res = trace.dissipation_residual.empty() ? nan : trace.dissipation_residual[i];
        out << format_number(trace.times[i]) << ',' << format_number(trace.state_norm[i]) << ','
            << format_number(trace.output_norm[i]) << ',' << format_number(trace.input_norm[i]) << ','
            << format_number(h) << ',' << format_number(s) << ',' << format_number(res) << '\n';
    }
}

void write_state_dump(const std::string& path, const SimulationTrace& trace)
{
    if (trace.states.empty()) throw InvalidArgument("trace has no recorded states to dump");
    const auto width = static_cast<std::size_t>(trace.states.front().size());
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw InvalidArgument("cannot write " + path);
    for (const auto& x : trace.states) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const auto bits = std::bit_cast<std::uint64_t>(x[i]);
            char bytes[8];
            for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
            bin.write(bytes, sizeof bytes);
        }
    }
    if (!bin) throw InvalidArgument("failed writing " + path);

    Json meta;
    meta["file"] = path;
    meta["dtype"] = "float64";
    meta["byte_order"] = "little";
    meta["layout"] = "row-major";
    meta["shape"] = {trace.states.size(), width};
    Json times = Json::array();
    for (double t : trace.times) times.push_back(t);
    meta["times"] = std::move(times);
    std::ofstream side(path + ".json");
    if (!side) throw InvalidArgument("cannot write " + path + ".json");
    side << meta.dump(2) << '\n';
}

}  // namespace tinet::io
