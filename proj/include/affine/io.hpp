#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "affine/model.hpp"
#include "affine/riccati.hpp"
#include "affine/simulate.hpp"
#include "affine/transform.hpp"

namespace affine {

/// Model file schema:
///   {
///     "dim": p,
///     "state_space": {"kind": "canonical", "m": m} | {"kind": "psd", "d": d} | {"kind": "lorentz"}
///                    | {"kind": "parabolic"} | {"kind": "half_spaces", "constraints": [{"normal": [...], "offset": c}]},
///     "a0": [p numbers],
///     "a": [p*p numbers, column-major, columns a^1..a^p],
///     "A": [p+1 entries, each an upper triangle (p(p+1)/2 numbers, row by row) or a full p x p nested array],
///     "K": [p+1 records] (optional), each one of
///          {"family": "none"}
///          {"family": "finite_atomic", "atoms": [{"weight": w, "z": [...]}]}
///          {"family": "exponential_ray", "mass": m, "rate": r, "direction": [...]}
///          {"family": "tabulated", "nodes": [{"weight": w, "z": [...]}]}
///          {"family": "tabulated", "direction": [...], "grid": [...], "density": [...]}
///   }
/// Every failure raises Error(ModelFormat) naming the offending field.
AffineModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const AffineModel& model);

/// Parse errors report the line and column of the offending character.
AffineModel parse_model(const std::string& text);
AffineModel load_model(const std::filesystem::path& path);
void save_model(const AffineModel& model, const std::filesystem::path& path);

/// "1.5", "-2i", "0.3-1e-2i", "i", "-i".
Complex parse_complex(const std::string& text);
/// Comma-separated complex numbers.
CVec parse_complex_vector(const std::string& text);
/// Comma-separated reals.
Vec parse_real_vector(const std::string& text);

nlohmann::json complex_json(Complex z);
nlohmann::json complex_vector_json(const CVec& v);

nlohmann::json to_json(const RiccatiSolution& sol);
nlohmann::json to_json(const ExplosionTime& e);
nlohmann::json to_json(const TransformValue& v);
nlohmann::json to_json(const RayProbe& probe);
nlohmann::json to_json(const MCEstimate& est);
nlohmann::json to_json(const AdmissibilityReport& rep);
nlohmann::json to_json(const DampedSequence& seq);
nlohmann::json to_json(const MartingaleDiagnostic& diag);

/// t, Re psi0, Im psi0, Re psi_1..p, Im psi_1..p.
std::string solution_csv(const RiccatiSolution& sol);
/// lambda, t_inf_estimate, verdict.
std::string ray_probe_csv(const RayProbe& probe);
/// t, then mean/std/min/max per coordinate at every checkpoint.
std::string ensemble_summary_csv(const PathEnsemble& ensemble);

}  // namespace affine
