// io.hpp — model/state JSON files, CSV artifacts, hashing and atomic writes
#pragma once

#include "qclt/clt.hpp"
#include "qclt/dynamics.hpp"
#include "qclt/model.hpp"
#include "qclt/spectrum.hpp"
#include "qclt/state.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace qclt {

// Model files: {n, local_dims, boundary, builder, params | custom_terms}.
// builder "ising" takes params {B, J}; "harmonic" takes {mass, omega,
// d_trunc}; "custom" takes custom_terms {site_terms, bond_terms} with each
// matrix either a nested array of [re, im] pairs or {"rows", "cols",
// "base64"} of little-endian row-major (re, im) doubles.  Serialization
// always emits the explicit custom form with nested arrays; doubles are
// printed in shortest round-trip form, so parse(serialize(m)) == m exactly.
nlohmann::json model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);

// {"rows", "cols", "base64"} form of one matrix, for compact model files.
nlohmann::json matrix_to_base64_json(const Matrix& m);

// State section: {"locals": [per-site array of [re, im]]} or
// {"builder": "all-up" | "all-plus" | "random", "seed": uint (default 0)}.
nlohmann::json state_to_json(const ProductState& state);
ProductState state_from_json(const nlohmann::json& j, const ModelSpec& spec);

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double x);

// FNV-1a 64-bit over the canonical (dumped) JSON text, as 16 hex digits.
std::string json_hash(const nlohmann::json& j);

// Pinned numeric tolerances, for run metadata.
nlohmann::json tolerance_defaults();

// Writes to <path>.tmp in the same directory, then renames over path.
void write_file_atomic(const std::string& path, const std::string& contents);

// CSV renderers ('\n' line endings, header first).
std::string measure_csv(const SpectralMeasure& measure);       // value,weight | grid,density
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string fidelity_csv(const FidelityTrace& trace);          // t,fidelity,gaussian_model,deviation
std::string transition_csv(const TransitionTrace& trace);      // t,probability

nlohmann::json gaussian_report_to_json(const GaussianReport& report);
nlohmann::json sweep_rows_to_json(const std::vector<SweepRow>& rows);

// The model-file schema document printed by `qclt schema`.
std::string model_schema();

}  // namespace qclt
