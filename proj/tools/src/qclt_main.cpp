// qclt_main.cpp — command-line driver: measure, verify, sweep, dynamics, schema
#include "CLI11.hpp"

#include "qclt/clt.hpp"
#include "qclt/dynamics.hpp"
#include "qclt/eig.hpp"
#include "qclt/io.hpp"
#include "qclt/krylov.hpp"
#include "qclt/model.hpp"
#include "qclt/spectrum.hpp"
#include "qclt/state.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

namespace {

using nlohmann::json;
using namespace qclt;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  in >> j;
  return j;
}

int thread_budget() {
  if (const char* env = std::getenv("QCLT_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
    throw std::invalid_argument("QCLT_THREADS must be a positive integer");
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

struct CommonOptions {
  std::string model_path;
  std::string state_arg;  // builder name, file path, or empty for the model's
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int n_override = 0;
  long threshold = default_dense_threshold;
  int kpm_moments = 2048;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_model = true) {
  if (with_model)
    cmd->add_option("--model", opt.model_path, "model JSON file")
        ->required()
        ->check(CLI::ExistingFile);
  cmd->add_option("--state", opt.state_arg,
                  "all-up | all-plus | random | state JSON file (default: the "
                  "model file's state section, else all-up)");
  cmd->add_option("--seed", opt.seed, "seed for the random state builder");
  cmd->add_option("--out", opt.out_dir, "output directory")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--n", opt.n_override, "override the model file's n")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threshold", opt.threshold,
                  "dense-diagonalization dimension cutoff");
  cmd->add_option("--moments", opt.kpm_moments,
                  "Chebyshev moment count for the KPM fallback");
}

ModelSpec load_model(const CommonOptions& opt, json* raw = nullptr) {
  json mj = read_json_file(opt.model_path);
  if (opt.n_override > 0) {
    mj["n"] = opt.n_override;
    mj.erase("local_dims");  // re-derived by the builder for the new n
  }
  if (raw) *raw = mj;
  return model_from_json(mj);
}

ProductState load_state(const CommonOptions& opt, const ModelSpec& spec,
                        const json& model_json) {
  if (opt.state_arg.empty()) {
    if (model_json.contains("state"))
      return state_from_json(model_json.at("state"), spec);
    return all_up_state(spec);
  }
  if (opt.state_arg == "all-up") return all_up_state(spec);
  if (opt.state_arg == "all-plus") return all_plus_state(spec);
  if (opt.state_arg == "random") return random_product_state(spec, opt.seed);
  return state_from_json(read_json_file(opt.state_arg), spec);
}

json stats_to_json(const StateStatistics& st) {
  return json{{"n", st.n},
              {"mean_energy", st.mean_energy},
              {"variance", st.variance},
              {"cprime", st.cprime},
              {"c_estimate", st.c_estimate}};
}

std::string out_path(const CommonOptions& opt, const std::string& name) {
  return opt.out_dir + "/" + name;
}

// ---- measure -------------------------------------------------------------

int run_measure(const CommonOptions& opt) {
  json mj;
  const ModelSpec spec = load_model(opt, &mj);
  const ProductState state = load_state(opt, spec, mj);
  const StateStatistics stats = energy_stats(spec, state);
  const HamiltonianOperator op(spec, opt.threshold);

  SpectralMeasure raw;
  std::string method;
  if (op.has_dense()) {
    method = "exact";
    raw = spectral_measure_exact(op, state);
  } else {
    method = "kpm";
    raw = spectral_density_kpm(op, state, opt.kpm_moments);
  }
  const SpectralMeasure standardized = standardize(raw, stats);

  const RealVector grid = default_charfn_grid();
  std::vector<CharFnSample> samples;
  samples.reserve(grid.size());
  for (long i = 0; i < grid.size(); ++i) {
    if (method == "exact")
      samples.push_back({grid[i], char_fn_from_measure(standardized, grid[i])});
    else
      samples.push_back(char_fn_krylov(op, state, stats, grid[i]));
  }
  const GaussianReport report = gaussian_comparison(standardized, samples, spec.n);

  write_file_atomic(out_path(opt, "measure.csv"), measure_csv(raw));
  json rj{{"model_hash", json_hash(model_to_json(spec))},
          {"state_hash", json_hash(state_to_json(state))},
          {"method", method},
          {"n", spec.n},
          {"stats", stats_to_json(stats)},
          {"gaussian", gaussian_report_to_json(report)},
          {"tolerances", tolerance_defaults()}};
  if (method == "kpm") rj["kpm_moments"] = opt.kpm_moments;
  write_file_atomic(out_path(opt, "report.json"), rj.dump(2) + "\n");
  return 0;
}

// ---- verify --------------------------------------------------------------

struct CheckRow {
  std::string name;
  std::string status;  // PASS | FAIL | SKIP
  double residual = 0.0;
  double tolerance = 0.0;
  std::string note;
};

int run_verify(const CommonOptions& opt, int k_override, bool as_json) {
  json mj;
  const ModelSpec spec = load_model(opt, &mj);
  const ProductState state = load_state(opt, spec, mj);
  std::vector<CheckRow> checks;
  const auto push = [&checks](const std::string& name, double residual,
                              double tolerance, const std::string& note = "") {
    checks.push_back({name, residual <= tolerance ? "PASS" : "FAIL", residual,
                      tolerance, note});
  };
  const auto skip = [&checks](const std::string& name, const std::string& why) {
    checks.push_back({name, "SKIP", 0.0, 0.0, why});
  };

  spec.validate();
  push("model_validate", 0.0, 0.0, "shapes, counts, Hermiticity");

  const LocalityReport locality = check_locality(spec);
  push("locality", locality.max_far_commutator, tol::locality,
       std::to_string(locality.far_pairs_checked) + " far pairs");

  const StateStatistics stats = energy_stats(spec, state);
  push("moment_cross_check", 0.0, 0.0, "full-space vs local contraction routes");

  const HamiltonianOperator op(spec, opt.threshold);
  if (op.has_dense()) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    Vector v(op.total_dim());
    double worst = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
      for (long i = 0; i < v.size(); ++i)
        v[i] = Complex(normal(rng), normal(rng));
      const Vector dense = op.dense() * v;
      worst = std::max(worst, (dense - op.apply(v)).norm() /
                                  std::max(1.0, dense.norm()));
    }
    push("dense_vs_apply", worst, tol::dense_vs_apply);
  } else {
    skip("dense_vs_apply", "dimension over the dense threshold");
  }

  if (stats.variance > 0.0) {
    const VarianceCondition vc =
        check_variance_condition(stats, stats.c_estimate);
    push("variance_condition", vc.ok ? std::max(0.0, -vc.margin) : 1.0, 0.0,
         "sigma^2 >= n*C witnessed by C = sigma^2/n = " +
             format_double(stats.c_estimate));
  } else {
    skip("variance_condition", "degenerate variance");
  }

  const int k = k_override > 0 ? k_override : default_k(spec.n);
  const BlockDecomposition blocks(spec, state, k);
  {
    std::vector<int> seen(spec.n, 0);
    for (const auto& blk : blocks.big_blocks())
      for (int l : blk) ++seen[l];
    for (int l : blocks.small_blocks()) ++seen[l];
    const bool once =
        std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
    push("block_partition", once ? 0.0 : 1.0, 0.0,
         "every site in exactly one block");
  }

  const LyapunovResult lyap = lyapunov_sum(blocks);
  push("lyapunov_bound", lyap.sum - lyap.bound, 0.0,
       "sum " + format_double(lyap.sum) + " vs bound " +
           format_double(lyap.bound));

  if (op.has_dense()) {
    const FactorizationReport fact = check_factorization(blocks, 2, 2);
    push("factorization_moments", fact.max_residual, tol::factorization);
    push("factorization_commutator", fact.max_commutator_action,
         tol::factorization);

    RealVector rgrid(25);
    for (int i = 0; i < 25; ++i) rgrid[i] = -3.0 + 0.25 * i;
    push("factorization_charfn", char_fn_factorization_check(blocks, rgrid),
         tol::charfn_factorization);

    const SpectralMeasure standardized =
        standardize(spectral_measure_exact(op, state), stats);
    const SpectralMeasure& zp = blocks.zprime_measure();
    double worst_excess = 0.0;
    for (long i = 0; i < rgrid.size(); ++i) {
      const double r = rgrid[i];
      const double measured = std::abs(char_fn_from_measure(standardized, r) -
                                       char_fn_from_measure(zp, r));
      const double bound = truncation_error_bound(spec.n, k, stats.c_estimate,
                                                  stats.cprime, r);
      worst_excess = std::max(worst_excess, measured - bound);
    }
    push("truncation_bound", worst_excess, tol::bound_slack,
         "measured char-fn gap never exceeds the bound");

    double dual = 0.0;
    for (const double r : {0.5, 1.5, 3.0})
      dual = std::max(dual,
                      std::abs(char_fn_exact(op, state, stats, r).value -
                               char_fn_krylov(op, state, stats, r).value));
    push("charfn_dual_path", dual, tol::dual_path_charfn);
  } else {
    skip("factorization_moments", "dimension over the dense threshold");
    skip("factorization_charfn", "dimension over the dense threshold");
    skip("truncation_bound", "dimension over the dense threshold");
    skip("charfn_dual_path", "dimension over the dense threshold");
  }

  const bool all_ok =
      std::all_of(checks.begin(), checks.end(),
                  [](const CheckRow& c) { return c.status != "FAIL"; });

  if (as_json) {
    json arr = json::array();
    for (const CheckRow& c : checks)
      arr.push_back(json{{"name", c.name},
                         {"status", c.status},
                         {"residual", c.residual},
                         {"tolerance", c.tolerance},
                         {"note", c.note}});
    const json out{{"ok", all_ok},
                   {"k", k},
                   {"model_hash", json_hash(model_to_json(spec))},
                   {"state_hash", json_hash(state_to_json(state))},
                   {"stats", stats_to_json(stats)},
                   {"checks", arr}};
    std::cout << out.dump(2) << "\n";
  } else {
    for (const CheckRow& c : checks) {
      std::cout << c.status << "  " << c.name;
      if (c.status != "SKIP")
        std::cout << "  residual=" << format_double(c.residual)
                  << " tol=" << format_double(c.tolerance);
      if (!c.note.empty()) std::cout << "  (" << c.note << ")";
      std::cout << "\n";
    }
    std::cout << (all_ok ? "all checks passed" : "CHECKS FAILED") << "\n";
  }
  return all_ok ? 0 : 2;
}

// ---- sweep ---------------------------------------------------------------

int run_sweep(const CommonOptions& opt, const std::vector<int>& n_list) {
  if (n_list.empty())
    throw std::invalid_argument("sweep needs a non-empty --n-list");
  const json mj = read_json_file(opt.model_path);
  const std::string builder = mj.value("builder", "custom");
  if (builder != "ising" && builder != "harmonic")
    throw std::invalid_argument(
        "sweep needs a parametric builder (ising or harmonic) so n can vary");

  const ModelFactory model_for = [mj](int n) {
    json j = mj;
    j["n"] = n;
    j.erase("local_dims");
    j.erase("state");
    return model_from_json(j);
  };
  const CommonOptions& o = opt;
  const StateFactory state_for = [&o, &mj](const ModelSpec& spec) {
    return load_state(o, spec, mj);
  };

  const std::vector<SweepRow> rows = convergence_sweep(
      model_for, state_for, n_list, opt.threshold, opt.kpm_moments,
      thread_budget());

  write_file_atomic(out_path(opt, "sweep.csv"), sweep_csv(rows));
  const json meta{{"builder", builder},
                  {"params", mj.value("params", json::object())},
                  {"boundary", mj.value("boundary", "open")},
                  {"state", opt.state_arg.empty() ? "all-up" : opt.state_arg},
                  {"seed", opt.seed},
                  {"n_list", n_list},
                  {"dense_threshold", opt.threshold},
                  {"kpm_moments", opt.kpm_moments},
                  {"rows", sweep_rows_to_json(rows)},
                  {"tolerances", tolerance_defaults()}};
  write_file_atomic(out_path(opt, "sweep.json"), meta.dump(2) + "\n");
  return 0;
}

// ---- dynamics ------------------------------------------------------------

int run_dynamics(const CommonOptions& opt, const std::string& state_b_arg,
                 double tmax, int steps, double tmax_b) {
  json mj;
  const ModelSpec spec = load_model(opt, &mj);
  const ProductState state = load_state(opt, spec, mj);
  const StateStatistics stats = energy_stats(spec, state);
  const HamiltonianOperator op(spec, opt.threshold);

  // sigma() throws the degenerate-variance error (exit 2) only when a
  // default horizon actually needs it.
  if (tmax <= 0.0) tmax = 2.0 / stats.sigma();
  RealVector times(steps + 1);
  for (int i = 0; i <= steps; ++i) times[i] = tmax * i / steps;

  const FidelityTrace fid = fidelity_trace(op, state, times);
  write_file_atomic(out_path(opt, "fidelity.csv"), fidelity_csv(fid));

  json meta{{"model_hash", json_hash(model_to_json(spec))},
            {"state_hash", json_hash(state_to_json(state))},
            {"method", op.has_dense() ? "exact" : "krylov"},
            {"sigma2", stats.variance},
            {"tmax", tmax},
            {"steps", steps},
            {"stats", stats_to_json(stats)},
            {"tolerances", tolerance_defaults()}};

  if (!state_b_arg.empty()) {
    CommonOptions opt_b = opt;
    opt_b.state_arg = state_b_arg;
    const ProductState state_b = load_state(opt_b, spec, mj);
    const StateStatistics stats_b = energy_stats(spec, state_b);

    double ground;
    std::string ground_method;
    if (op.has_dense()) {
      ground = op.eigensystem().values[0];
      ground_method = "exact";
    } else {
      auto apply = [&op](const Vector& in, Vector& out) { op.apply_add(in, out); };
      ground = estimate_spectral_bounds(apply, op.total_dim()).lo;
      ground_method = "power-iteration";
    }
    const TransitionBound bound = transition_bound(stats, stats_b, ground);

    if (tmax_b <= 0.0) tmax_b = 20.0 / stats.sigma();
    RealVector times_b(steps + 1);
    for (int i = 0; i <= steps; ++i) times_b[i] = tmax_b * i / steps;
    const TransitionTrace trace = transition_trace(op, state, state_b, times_b);
    write_file_atomic(out_path(opt, "transition.csv"), transition_csv(trace));

    meta["transition"] = json{
        {"state_b_hash", json_hash(state_to_json(state_b))},
        {"stats_b", stats_to_json(stats_b)},
        {"ground_energy", ground},
        {"ground_method", ground_method},
        {"bound", bound.value},
        {"regime_ok_a", bound.regime_ok_a},
        {"regime_ok_b", bound.regime_ok_b},
        {"max_probability", trace.probability.size()
                                ? trace.probability.maxCoeff()
                                : 0.0},
        {"tmax", tmax_b}};
  }
  write_file_atomic(out_path(opt, "dynamics.json"), meta.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Keep BLAS single-threaded unless the user explicitly chose otherwise;
  // parallelism is spent on independent sweep rows instead.
  setenv("OPENBLAS_NUM_THREADS", "1", 0);

  CLI::App app{"qclt — spectral statistics of product states on "
               "nearest-neighbour chains"};
  app.require_subcommand(1);

  CommonOptions opt;
  int k_override = 0;
  bool as_json = false;
  std::vector<int> n_list;
  std::string state_b;
  double tmax = 0.0, tmax_b = 0.0;
  int steps = 100;

  CLI::App* measure = app.add_subcommand(
      "measure", "spectral measure of a product state + Gaussian comparison");
  add_common(measure, opt);

  CLI::App* verify = app.add_subcommand(
      "verify", "run the blocking/factorization/bound checks on one model");
  add_common(verify, opt);
  verify->add_option("--k", k_override, "override the block length parameter")
      ->check(CLI::PositiveNumber);
  verify->add_flag("--json", as_json, "emit the report as JSON");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "convergence table over a list of chain lengths");
  add_common(sweep, opt);
  sweep->add_option("--n-list", n_list, "chain lengths, comma separated")
      ->required()
      ->delimiter(',');

  CLI::App* dynamics = app.add_subcommand(
      "dynamics", "fidelity decay and optional transition probability");
  add_common(dynamics, opt);
  dynamics->add_option("--state-b", state_b,
                       "orthogonal target state for the transition trace");
  dynamics->add_option("--tmax", tmax, "fidelity time horizon (default 2/sigma)");
  dynamics->add_option("--tmax-b", tmax_b,
                       "transition time horizon (default 20/sigma)");
  dynamics->add_option("--steps", steps, "number of time steps")
      ->check(CLI::PositiveNumber);

  CLI::App* schema =
      app.add_subcommand("schema", "print the model-file JSON schema");

  try {
    app.parse(argc, argv);
    if (schema->parsed()) {
      std::cout << qclt::model_schema();
      return 0;
    }
    if (measure->parsed()) return run_measure(opt);
    if (verify->parsed()) return run_verify(opt, k_override, as_json);
    if (sweep->parsed()) return run_sweep(opt, n_list);
    if (dynamics->parsed())
      return run_dynamics(opt, state_b, tmax, steps, tmax_b);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const qclt::HypothesisError& e) {
    std::cout << json{{"error", {{"type", "hypothesis-violation"},
                                 {"what", e.what()}}}}
                     .dump()
              << "\n";
    return 2;
  } catch (const qclt::NumericError& e) {
    std::cout << json{{"error", {{"type", "numeric-failure"},
                                 {"what", e.what()}}}}
                     .dump()
              << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
