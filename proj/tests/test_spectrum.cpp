// test_spectrum.cpp — spectral measures (exact and KPM), standardization,
// CDF and characteristic functions
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qclt/model.hpp"
#include "qclt/spectrum.hpp"
#include "qclt/state.hpp"

#include <cmath>

using namespace qclt;

namespace {

ModelSpec ising(int n) { return build_ising(n, 1.0, 1.0, Boundary::open); }

}  // namespace

TEST_CASE("exact measure: normalized, ascending, moment-consistent") {
  const ModelSpec spec = ising(6);
  const HamiltonianOperator op(spec);
  for (std::uint64_t seed : {0u, 7u}) {
    const ProductState st = random_product_state(spec, seed);
    const SpectralMeasure m = spectral_measure_exact(op, st);
    REQUIRE(m.kind == MeasureKind::exact);
    CHECK(m.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.weights.minCoeff() >= 0.0);
    for (long i = 1; i < m.values.size(); ++i) CHECK(m.values[i] >= m.values[i - 1]);

    const StateStatistics stats = energy_stats(spec, st);
    CHECK(m.mean() == doctest::Approx(stats.mean_energy).epsilon(1e-10));
    CHECK(m.variance() == doctest::Approx(stats.variance).epsilon(1e-8));
  }
}

TEST_CASE("all-up ground-state weight matches the frozen oracle") {
  const ModelSpec spec = ising(8);
  const HamiltonianOperator op(spec);
  const SpectralMeasure m = spectral_measure_exact(op, all_up_state(spec));
  long imax = 0;
  m.weights.maxCoeff(&imax);
  CHECK(m.weights[imax] == doctest::Approx(0.8906).epsilon(1e-3));
  CHECK(m.values[imax] == doctest::Approx(-8.442571).epsilon(1e-5));
}

TEST_CASE("exact measure requires the dense path") {
  const ModelSpec spec = ising(4);
  const HamiltonianOperator op(spec, /*dense_threshold=*/8);
  CHECK_THROWS_AS(spectral_measure_exact(op, all_up_state(spec)),
                  std::invalid_argument);
}

TEST_CASE("standardize centers and scales; composition is tracked") {
  const ModelSpec spec = ising(6);
  const HamiltonianOperator op(spec);
  const ProductState st = all_up_state(spec);
  const StateStatistics stats = energy_stats(spec, st);
  const SpectralMeasure raw = spectral_measure_exact(op, st);
  const SpectralMeasure z = standardize(raw, stats);

  CHECK(z.standardized);
  CHECK(z.mean() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(z.variance() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(z.shift == doctest::Approx(stats.mean_energy).epsilon(1e-12));
  CHECK(z.scale == doctest::Approx(stats.sigma()).epsilon(1e-12));
  for (long i = 0; i < raw.values.size(); ++i) {
    const double expect = (raw.values[i] - stats.mean_energy) / stats.sigma();
    CHECK(z.values[i] == doctest::Approx(expect).epsilon(1e-12));
  }

  // standardizing again with unit stats is the identity
  StateStatistics unit;
  unit.n = stats.n;
  unit.mean_energy = 0.0;
  unit.variance = 1.0;
  const SpectralMeasure zz = standardize(z, unit);
  CHECK(zz.shift == doctest::Approx(z.shift).epsilon(1e-12));
  CHECK(zz.scale == doctest::Approx(z.scale).epsilon(1e-12));

  StateStatistics degenerate;
  degenerate.n = stats.n;
  degenerate.variance = 0.0;
  CHECK_THROWS_AS(standardize(raw, degenerate), DegenerateVarianceError);
}

TEST_CASE("cdf is a right-continuous step function on atoms") {
  SpectralMeasure m;
  m.kind = MeasureKind::exact;
  m.values = RealVector(3);
  m.weights = RealVector(3);
  m.values << -1.0, 0.5, 0.5;   // tie at 0.5
  m.weights << 0.25, 0.25, 0.5;

  CHECK(cdf(m, -2.0) == 0.0);
  CHECK(cdf(m, -1.0) == doctest::Approx(0.25).epsilon(1e-15));   // atom included
  CHECK(cdf(m, -1.0 - 1e-12) == 0.0);                            // left limit
  CHECK(cdf(m, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(cdf(m, 0.5) == doctest::Approx(1.0).epsilon(1e-15));     // tie group together
  CHECK(cdf(m, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("characteristic function basics on the exact measure") {
  const ModelSpec spec = ising(5);
  const HamiltonianOperator op(spec);
  const ProductState st = random_product_state(spec, 3);
  const StateStatistics stats = energy_stats(spec, st);
  const SpectralMeasure z = standardize(spectral_measure_exact(op, st), stats);

  CHECK(std::abs(char_fn_from_measure(z, 0.0) - Complex(1, 0)) < 1e-12);
  for (const double r : {0.3, 1.1, 2.7}) {
    const Complex plus = char_fn_from_measure(z, r);
    const Complex minus = char_fn_from_measure(z, -r);
    CHECK(std::abs(plus - std::conj(minus)) < 1e-12);  // real measure symmetry
    CHECK(std::abs(plus) <= 1.0 + 1e-12);
  }

  SpectralMeasure kpm_like;
  kpm_like.kind = MeasureKind::kpm;
  CHECK_THROWS_AS(char_fn_from_measure(kpm_like, 1.0), std::invalid_argument);
}

TEST_CASE("exact and Krylov characteristic functions agree") {
  const ModelSpec spec = ising(6);
  const HamiltonianOperator op(spec);
  const ProductState st = random_product_state(spec, 5);
  const StateStatistics stats = energy_stats(spec, st);
  for (const double r : {0.5, 1.7, 3.0, -2.2}) {
    const CharFnSample e = char_fn_exact(op, st, stats, r);
    const CharFnSample k = char_fn_krylov(op, st, stats, r);
    CHECK(e.r == r);
    CHECK(std::abs(e.value - k.value) < tol::dual_path_charfn);
  }

  // auto dispatch: dense -> exact; above threshold -> krylov
  const CharFnSample auto_dense = char_fn(op, st, stats, 1.3);
  CHECK(std::abs(auto_dense.value - char_fn_exact(op, st, stats, 1.3).value) == 0.0);
  const HamiltonianOperator lean(spec, /*dense_threshold=*/8);
  const CharFnSample auto_lean = char_fn(lean, st, stats, 1.3);
  CHECK(std::abs(auto_lean.value - auto_dense.value) < tol::dual_path_charfn);
}

TEST_CASE("kpm density: normalized, nonnegative, matches moments") {
  const ModelSpec spec = ising(8);
  const HamiltonianOperator op(spec);
  const ProductState st = random_product_state(spec, 1);
  const SpectralMeasure d = spectral_density_kpm(op, st, 2048);

  REQUIRE(d.kind == MeasureKind::kpm);
  CHECK(d.moment_count == 2048);
  CHECK(d.grid.size() == 4096);
  for (long i = 1; i < d.grid.size(); ++i) CHECK(d.grid[i] > d.grid[i - 1]);
  CHECK(d.density.minCoeff() >= 0.0);
  CHECK(std::abs(d.total_weight() - 1.0) < tol::kpm_integral);

  const StateStatistics stats = energy_stats(spec, st);
  CHECK(std::abs(d.mean() - stats.mean_energy) / stats.sigma() < 1e-3);
  CHECK(std::abs(d.variance() - stats.variance) / stats.variance < 1e-2);
}

TEST_CASE("kpm input validation") {
  const ModelSpec spec = ising(4);
  const HamiltonianOperator op(spec);
  const ProductState st = all_up_state(spec);
  CHECK_THROWS_AS(spectral_density_kpm(op, st, 8), std::invalid_argument);

  RealVector bad(3);
  bad << 0.0, 1.0, 1.0;
  CHECK_THROWS_AS(spectral_density_kpm(op, st, 64, bad), std::invalid_argument);
}

TEST_CASE("kpm on a custom grid vanishes outside the spectrum") {
  const ModelSpec spec = ising(4);
  const HamiltonianOperator op(spec);
  const ProductState st = random_product_state(spec, 2);
  // uniform grid reaching well past the spectral interval (about [-4.2, 4.2]);
  // fine enough that the trapezoid normalization invariant still holds
  const long npts = 8001;
  RealVector grid(npts);
  for (long i = 0; i < npts; ++i) grid[i] = -8.0 + 16.0 * i / (npts - 1);
  const SpectralMeasure d = spectral_density_kpm(op, st, 256, grid);
  CHECK(d.density[0] == 0.0);           // -8, outside
  CHECK(d.density[1000] == 0.0);        // -6, still outside
  CHECK(d.density[npts - 1] == 0.0);    // +8
  CHECK(d.density[npts / 2] > 0.0);     // center of the spectrum
  CHECK(d.total_weight() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kpm cdf tracks the exact cdf between atoms") {
  const ModelSpec spec = ising(8);
  const HamiltonianOperator op(spec);
  const ProductState st = random_product_state(spec, 1);
  const SpectralMeasure exact = spectral_measure_exact(op, st);
  const SpectralMeasure smooth = spectral_density_kpm(op, st, 2048);

  double sup = 0.0;
  for (long i = 0; i < smooth.grid.size(); i += 8) {
    const double x = smooth.grid[i];
    sup = std::max(sup, std::abs(cdf(smooth, x) - cdf(exact, x)));
  }
  // the irreducible gap is about half the largest atom weight (~0.01-0.03 for
  // a random product state at this size)
  CHECK(sup < 0.05);
}

TEST_CASE("standardized kpm measure keeps its normalization") {
  const ModelSpec spec = ising(6);
  const HamiltonianOperator op(spec);
  const ProductState st = random_product_state(spec, 4);
  const StateStatistics stats = energy_stats(spec, st);
  const SpectralMeasure z = standardize(spectral_density_kpm(op, st, 1024), stats);
  CHECK(z.standardized);
  CHECK(std::abs(z.total_weight() - 1.0) < tol::kpm_integral);
  CHECK(std::abs(z.mean()) < 1e-3);
  CHECK(std::abs(z.variance() - 1.0) < 1e-2);
}
