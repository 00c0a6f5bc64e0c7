// io.cpp
#include "qclt/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qclt {

namespace {

using nlohmann::json;

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    unsigned int chunk = data[i] << 16;
    if (i + 1 < len) chunk |= data[i + 1] << 8;
    if (i + 2 < len) chunk |= data[i + 2];
    out.push_back(kB64Alphabet[(chunk >> 18) & 63]);
    out.push_back(kB64Alphabet[(chunk >> 12) & 63]);
    out.push_back(i + 1 < len ? kB64Alphabet[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? kB64Alphabet[chunk & 63] : '=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  int lookup[256];
  std::fill(std::begin(lookup), std::end(lookup), -1);
  for (int i = 0; i < 64; ++i)
    lookup[static_cast<unsigned char>(kB64Alphabet[i])] = i;
  std::vector<unsigned char> out;
  unsigned int chunk = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = lookup[static_cast<unsigned char>(c)];
    if (v < 0) throw std::invalid_argument("invalid base64 character in matrix data");
    chunk = (chunk << 6) | static_cast<unsigned int>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((chunk >> bits) & 0xff));
    }
  }
  return out;
}

Complex entry_from_json(const json& e) {
  if (e.is_number()) return Complex(e.get<double>(), 0.0);
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return Complex(e[0].get<double>(), e[1].get<double>());
  throw std::invalid_argument(
      "matrix entries must be numbers or [re, im] pairs");
}

Matrix matrix_from_json(const json& jm) {
  if (jm.is_object()) {
    const long rows = jm.at("rows").get<long>();
    const long cols = jm.at("cols").get<long>();
    if (rows < 1 || cols < 1)
      throw std::invalid_argument("matrix shape must be positive");
    const std::vector<unsigned char> bytes =
        base64_decode(jm.at("base64").get<std::string>());
    const std::size_t expected =
        static_cast<std::size_t>(rows) * cols * 2 * sizeof(double);
    if (bytes.size() != expected)
      throw std::invalid_argument(
          "base64 matrix data has wrong length for its shape");
    Matrix m(rows, cols);
    const unsigned char* p = bytes.data();
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) {
        double re, im;
        std::memcpy(&re, p, sizeof(double));
        p += sizeof(double);
        std::memcpy(&im, p, sizeof(double));
        p += sizeof(double);
        m(r, c) = Complex(re, im);
      }
    return m;
  }
  if (!jm.is_array() || jm.empty())
    throw std::invalid_argument("matrix must be a nested array or a base64 object");
  const long rows = static_cast<long>(jm.size());
  const long cols = static_cast<long>(jm[0].size());
  Matrix m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const json& row = jm[r];
    if (!row.is_array() || static_cast<long>(row.size()) != cols)
      throw std::invalid_argument("matrix rows must all have the same length");
    for (long c = 0; c < cols; ++c) m(r, c) = entry_from_json(row[c]);
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c)
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw std::invalid_argument("boundary must be \"open\" or \"periodic\"");
}

}  // namespace

json matrix_to_base64_json(const Matrix& m) {
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(m.size()) * 2 * sizeof(double));
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) {
      const double re = m(r, c).real();
      const double im = m(r, c).imag();
      unsigned char buf[2 * sizeof(double)];
      std::memcpy(buf, &re, sizeof(double));
      std::memcpy(buf + sizeof(double), &im, sizeof(double));
      bytes.insert(bytes.end(), buf, buf + sizeof(buf));
    }
  return json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"base64", base64_encode(bytes.data(), bytes.size())}};
}

json model_to_json(const ModelSpec& spec) {
  json j;
  j["n"] = spec.n;
  j["local_dims"] = spec.local_dims;
  j["boundary"] = spec.boundary == Boundary::open ? "open" : "periodic";
  j["builder"] = "custom";
  json site_terms = json::array();
  for (const Matrix& m : spec.site_terms) site_terms.push_back(matrix_to_json(m));
  json bond_terms = json::array();
  for (const Matrix& m : spec.bond_terms) bond_terms.push_back(matrix_to_json(m));
  j["custom_terms"] = {{"site_terms", std::move(site_terms)},
                       {"bond_terms", std::move(bond_terms)}};
  return j;
}

ModelSpec model_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("model file must be a JSON object");
  const int n = j.at("n").get<int>();
  const Boundary bc = boundary_from_string(j.value("boundary", "open"));
  const std::string builder = j.value("builder", "custom");
  const json params = j.value("params", json::object());

  ModelSpec spec;
  if (builder == "ising") {
    spec = build_ising(n, params.value("B", 1.0), params.value("J", 1.0), bc);
  } else if (builder == "harmonic") {
    spec = build_harmonic(n, params.value("mass", 1.0), params.value("omega", 1.0),
                          params.at("d_trunc").get<int>(), bc);
  } else if (builder == "custom") {
    spec.n = n;
    spec.boundary = bc;
    spec.local_dims = j.at("local_dims").get<std::vector<int>>();
    const json& terms = j.at("custom_terms");
    for (const json& m : terms.at("site_terms"))
      spec.site_terms.push_back(matrix_from_json(m));
    for (const json& m : terms.at("bond_terms"))
      spec.bond_terms.push_back(matrix_from_json(m));
    spec.validate();
  } else {
    throw std::invalid_argument("unknown builder \"" + builder +
                                "\" (expected ising, harmonic or custom)");
  }

  if (builder != "custom" && j.contains("local_dims")) {
    const auto dims = j.at("local_dims").get<std::vector<int>>();
    if (dims != spec.local_dims)
      throw std::invalid_argument(
          "local_dims in file contradict the builder's dimensions");
  }
  return spec;
}

json state_to_json(const ProductState& state) {
  json locals = json::array();
  for (const Vector& v : state.locals) {
    json site = json::array();
    for (long i = 0; i < v.size(); ++i)
      site.push_back(json::array({v[i].real(), v[i].imag()}));
    locals.push_back(std::move(site));
  }
  return json{{"locals", std::move(locals)}};
}

ProductState state_from_json(const json& j, const ModelSpec& spec) {
  if (!j.is_object()) throw std::invalid_argument("state section must be a JSON object");
  if (j.contains("locals")) {
    const json& locals = j.at("locals");
    if (static_cast<int>(locals.size()) != spec.n)
      throw std::invalid_argument("state has wrong number of sites");
    std::vector<Vector> vecs;
    for (int mu = 0; mu < spec.n; ++mu) {
      const json& site = locals[mu];
      if (!site.is_array() ||
          static_cast<int>(site.size()) != spec.local_dims[mu])
        throw std::invalid_argument("state local vector has wrong dimension at site " +
                                    std::to_string(mu));
      Vector v(site.size());
      for (long i = 0; i < v.size(); ++i) v[i] = entry_from_json(site[i]);
      vecs.push_back(std::move(v));
    }
    return product_state(std::move(vecs));
  }
  const std::string builder = j.at("builder").get<std::string>();
  if (builder == "all-up") return all_up_state(spec);
  if (builder == "all-plus") return all_plus_state(spec);
  if (builder == "random")
    return random_product_state(spec, j.value("seed", std::uint64_t{0}));
  throw std::invalid_argument("unknown state builder \"" + builder +
                              "\" (expected all-up, all-plus or random)");
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string json_hash(const json& j) {
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

json tolerance_defaults() {
  return json{{"hermiticity", tol::hermiticity},
              {"dense_vs_apply", tol::dense_vs_apply},
              {"locality", tol::locality},
              {"weight_sum", tol::weight_sum},
              {"kpm_integral", tol::kpm_integral},
              {"factorization", tol::factorization},
              {"charfn_factorization", tol::charfn_factorization},
              {"stats_cross_check", tol::stats_cross_check},
              {"krylov_residual", tol::krylov_residual},
              {"dual_path_charfn", tol::dual_path_charfn},
              {"orthogonality", tol::orthogonality},
              {"variance_clamp", tol::variance_clamp}};
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

std::string measure_csv(const SpectralMeasure& measure) {
  std::string out;
  if (measure.kind == MeasureKind::exact) {
    out = "value,weight\n";
    for (long i = 0; i < measure.values.size(); ++i)
      out += format_double(measure.values[i]) + "," +
             format_double(measure.weights[i]) + "\n";
  } else {
    out = "grid,density\n";
    for (long i = 0; i < measure.grid.size(); ++i)
      out += format_double(measure.grid[i]) + "," +
             format_double(measure.density[i]) + "\n";
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "n,k,q,sigma2,cprime,ks,m1,m2,m3,m4,charfn_dev,lyapunov_sum,"
      "lyapunov_bound,trunc_bound_r1\n";
  for (const SweepRow& r : rows) {
    out += std::to_string(r.n) + "," + std::to_string(r.k) + "," +
           std::to_string(r.q) + "," + format_double(r.sigma2) + "," +
           format_double(r.cprime) + "," + format_double(r.ks) + "," +
           format_double(r.m1) + "," + format_double(r.m2) + "," +
           format_double(r.m3) + "," + format_double(r.m4) + "," +
           format_double(r.charfn_dev) + "," + format_double(r.lyapunov_sum) +
           "," + format_double(r.lyapunov_bound) + "," +
           format_double(r.trunc_bound_r1) + "\n";
  }
  return out;
}

std::string fidelity_csv(const FidelityTrace& trace) {
  std::string out = "t,fidelity,gaussian_model,deviation\n";
  for (long i = 0; i < trace.times.size(); ++i)
    out += format_double(trace.times[i]) + "," +
           format_double(trace.fidelity[i]) + "," +
           format_double(trace.gaussian_model[i]) + "," +
           format_double(std::abs(trace.fidelity[i] - trace.gaussian_model[i])) +
           "\n";
  return out;
}

std::string transition_csv(const TransitionTrace& trace) {
  std::string out = "t,probability\n";
  for (long i = 0; i < trace.times.size(); ++i)
    out += format_double(trace.times[i]) + "," +
           format_double(trace.probability[i]) + "\n";
  return out;
}

json gaussian_report_to_json(const GaussianReport& report) {
  json j{{"n", report.n},
         {"ks_distance", report.ks_distance},
         {"moments",
          {report.moments[0], report.moments[1], report.moments[2],
           report.moments[3]}},
         {"moment_devs",
          {report.moment_devs[0], report.moment_devs[1], report.moment_devs[2],
           report.moment_devs[3]}},
         {"charfn_dev", report.charfn_dev}};
  if (report.l1_density_dev) j["l1_density_dev"] = *report.l1_density_dev;
  return j;
}

json sweep_rows_to_json(const std::vector<SweepRow>& rows) {
  json arr = json::array();
  for (const SweepRow& r : rows) {
    arr.push_back(json{{"n", r.n},
                       {"k", r.k},
                       {"q", r.q},
                       {"sigma2", r.sigma2},
                       {"cprime", r.cprime},
                       {"ks", r.ks},
                       {"m1", r.m1},
                       {"m2", r.m2},
                       {"m3", r.m3},
                       {"m4", r.m4},
                       {"charfn_dev", r.charfn_dev},
                       {"lyapunov_sum", r.lyapunov_sum},
                       {"lyapunov_bound", r.lyapunov_bound},
                       {"trunc_bound_r1", r.trunc_bound_r1},
                       {"method", r.method}});
  }
  return arr;
}

std::string model_schema() {
  return R"schema({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "qclt model file",
  "type": "object",
  "required": ["n"],
  "properties": {
    "n": {"type": "integer", "minimum": 1, "description": "number of chain sites"},
    "local_dims": {
      "type": "array", "items": {"type": "integer", "minimum": 1},
      "description": "one local dimension per site; implied by ising (2) and harmonic (d_trunc) builders, required for custom"
    },
    "boundary": {"enum": ["open", "periodic"], "default": "open"},
    "builder": {"enum": ["ising", "harmonic", "custom"], "default": "custom"},
    "params": {
      "type": "object",
      "description": "ising: {B: 1.0, J: 1.0}; harmonic: {mass: 1.0, omega: 1.0, d_trunc (required)}",
      "properties": {
        "B": {"type": "number"}, "J": {"type": "number"},
        "mass": {"type": "number", "exclusiveMinimum": 0},
        "omega": {"type": "number", "exclusiveMinimum": 0},
        "d_trunc": {"type": "integer", "minimum": 2}
      }
    },
    "custom_terms": {
      "type": "object",
      "required": ["site_terms", "bond_terms"],
      "properties": {
        "site_terms": {"type": "array", "items": {"$ref": "#/definitions/matrix"},
                       "description": "n Hermitian matrices, local_dims[mu] square"},
        "bond_terms": {"type": "array", "items": {"$ref": "#/definitions/matrix"},
                       "description": "n-1 (open) or n (periodic) Hermitian matrices on |mu> (x) |mu+1>; the last periodic bond acts on (n-1, 0)"}
      }
    },
    "state": {
      "type": "object",
      "description": "optional companion state section, also accepted as a standalone file",
      "properties": {
        "locals": {"type": "array",
                   "description": "per site, an array of [re, im] amplitudes of the local vector"},
        "builder": {"enum": ["all-up", "all-plus", "random"]},
        "seed": {"type": "integer", "minimum": 0, "default": 0}
      }
    }
  },
  "definitions": {
    "matrix": {
      "oneOf": [
        {"type": "array",
         "description": "rows of entries; each entry a number or an [re, im] pair"},
        {"type": "object",
         "required": ["rows", "cols", "base64"],
         "properties": {
           "rows": {"type": "integer", "minimum": 1},
           "cols": {"type": "integer", "minimum": 1},
           "base64": {"type": "string",
                      "description": "row-major little-endian float64 (re, im) pairs"}
         }}
      ]
    }
  }
}
)schema";
}

}  // namespace qclt
