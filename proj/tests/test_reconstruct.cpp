#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "focktomo/errors.hpp"
#include "focktomo/frame_synth.hpp"
#include "focktomo/reconstruct.hpp"
#include "oracles.hpp"

using namespace focktomo;

namespace {

constexpr double kEta = 0.574;

const std::vector<double>& run_samples() {
  static const auto xs = sample_quadratures(DensityMatrix::lossy_single_photon(kEta), 200000, 42);
  return xs;
}

/// Histogram whose counts are the exact bin probabilities times `scale`.
Histogram exact_histogram(double eta, double width, double scale) {
  Histogram h;
  h.bin_width = width;
  const int half = static_cast<int>(std::lround(5.0 / width));
  h.center_offset = -half * width;
  for (int k = -half; k <= half; ++k) {
    const double a = (k - 0.5) * width, b = (k + 0.5) * width;
    const auto c = static_cast<std::uint64_t>(std::llround(scale * (oracle::lossy_cdf(b, eta) - oracle::lossy_cdf(a, eta))));
    h.counts.push_back(c);
    h.total += c;
  }
  return h;
}

double fock_wigner(unsigned n, double r2) {
  return (2.0 / oracle::kPi) * (n % 2 ? -1.0 : 1.0) * std::laguerre(n, 4.0 * r2) * std::exp(-2.0 * r2);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST_CASE("efficiency fit on the exact marginal") {
  for (double eta : {0.0, 0.3, kEta, 1.0}) {
    const auto fit = fit_efficiency(exact_histogram(eta, 0.05, 1e9));
    CHECK(fit.eta == doctest::Approx(eta).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("efficiency fit on sampled data") {
  const auto vac = sample_vacuum(1000000, 5, Stream::Sampling);
  const auto fv = fit_efficiency(build_histogram(vac));
  MESSAGE("vacuum eta " << fv.eta << " +- " << fv.stderr_eta);
  CHECK(std::abs(fv.eta) <= 0.005);

  const auto fr = fit_efficiency(build_histogram(run_samples()));
  MESSAGE("eta " << fr.eta << " +- " << fr.stderr_eta << " chi2/dof " << fr.chi2 / fr.dof);
  CHECK(std::abs(fr.eta - kEta) <= 0.01);
  CHECK(fr.stderr_eta > 0.0);
  CHECK(fr.stderr_eta < 0.01);
  CHECK(fr.iterations < kMaxFitIterations);

  const auto one = sample_quadratures(DensityMatrix::fock(1), 200000, 6);
  CHECK(std::abs(fit_efficiency(build_histogram(one)).eta - 1.0) <= 0.01);
}

TEST_CASE("efficiency fit rejects small or mismatched data") {
  const auto few = sample_vacuum(9999, 1, Stream::Sampling);
  CHECK_THROWS_AS(fit_efficiency(build_histogram(few)), DomainError);
  // Narrower than vacuum: no efficiency in [0, 1] can produce it.
  auto squeezed = sample_vacuum(50000, 2, Stream::Sampling);
  for (auto& x : squeezed) x *= 0.6;
  CHECK_THROWS_AS(fit_efficiency(build_histogram(squeezed)), ModelMismatchError);
}

TEST_CASE("bin-averaged model") {
  const double w = 0.05;
  for (double c : {-1.0, 0.0, 0.45}) {
    const double ref = oracle::integrate([](double x) { return oracle::lossy_pdf(x, kEta); }, c - w / 2, c + w / 2) / w;
    CHECK(lossy_marginal_bin_average(c, w, kEta) == doctest::Approx(ref).epsilon(1e-12));
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("pattern functions are bi-orthogonal to the oscillator densities") {
  CHECK(biorthogonality_error() <= 1e-6);

  // Independent check: Simpson's rule with the explicit Hermite form.
  const auto& tables = pattern_functions();
  REQUIRE(tables.size() == kMaxPatternOrder + 1);
  const auto& grid = tables[0].grid;
  const std::size_t n = grid.size();
  REQUIRE(n % 2 == 1);
  const double h = grid[1] - grid[0];
  double worst = 0.0;
  for (unsigned m = 0; m <= 10; ++m) {
    std::vector<double> dens(n);
    for (std::size_t i = 0; i < n; ++i) dens[i] = std::pow(oracle::psi(m, grid[i]), 2);
    for (int k = 0; k <= 10; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double wgt = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += wgt * dens[i] * tables[k].values[i];
      }
      s *= h / 3.0;
      worst = std::max(worst, std::abs(s - (static_cast<int>(m) == k ? 1.0 : 0.0)));
    }
  }
  MESSAGE("worst bi-orthogonality deviation " << worst);
  CHECK(worst <= 1e-6);
}

TEST_CASE("pattern functions are even and interpolate") {
  for (const auto& t : pattern_functions()) {
    const std::size_t n = t.values.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n / 2; ++i) worst = std::max(worst, std::abs(t.values[i] - t.values[n - 1 - i]));
    CHECK(worst <= 1e-8);
    CHECK(t(0.3) == doctest::Approx(t(-0.3)).epsilon(1e-8));
    CHECK(t(100.0) == t.values.back());
  }
  CHECK(pattern_function(4).values == pattern_functions()[4].values);
  CHECK_THROWS_AS(pattern_function(11), UnsupportedOrderError);
}

TEST_CASE("exact-density diagonal estimate reproduces the loss channel") {
  for (double eta : {0.0, 0.25, kEta, 1.0}) {
    const auto est = dm_diagonal_exact([eta](double x) { return oracle::lossy_pdf(x, eta); });
    REQUIRE(est.size() == kDefaultMaxN + 1);
    CHECK(std::abs(est[0] - (1.0 - eta)) <= 1e-6);
    CHECK(std::abs(est[1] - eta) <= 1e-6);
    for (int n = 2; n <= kDefaultMaxN; ++n) CHECK(std::abs(est[n]) <= 1e-6);
  }
  // A richer diagonal state.
  const std::vector<double> pops{0.1, 0.2, 0.3, 0.15, 0.25};
  const auto est = dm_diagonal_exact([&](double x) { return phase_averaged_pdf(pops, x); }, 6);
  for (int n = 0; n <= 6; ++n) CHECK(std::abs(est[n] - (n < 5 ? pops[n] : 0.0)) <= 1e-6);
}

TEST_CASE("sampled diagonal estimates") {
  const auto vac = sample_vacuum(200000, 9, Stream::Sampling);
  const auto v = dm_diagonal(vac);
  CHECK(std::abs(v.value[0] - 1.0) <= 3.0 * v.stderr_value[0]);
  for (int n = 1; n <= kDefaultMaxN; ++n) CHECK(std::abs(v.value[n]) <= 3.0 * v.stderr_value[n]);

  const auto r = dm_diagonal(run_samples());
  CHECK(std::abs(r.value[0] - 0.426) <= 0.01);
  CHECK(std::abs(r.value[1] - 0.572) <= 0.01);
  for (int n = 2; n <= 9; ++n) CHECK(std::abs(r.value[n]) <= 0.02);

  CHECK_THROWS_AS(dm_diagonal(std::vector<double>(9999, 0.0)), DomainError);
  CHECK_THROWS_AS(dm_diagonal(vac, 11), UnsupportedOrderError);
}

// ---------------------------------------------------------------------------

TEST_CASE("Wigner values at the origin") {
  CHECK(wigner_value(DensityMatrix::vacuum(), 0.0, 0.0) == doctest::Approx(2.0 / oracle::kPi).epsilon(1e-15));
  const double w = wigner_value(DensityMatrix::lossy_single_photon(kEta), 0.0, 0.0);
  CHECK(std::abs(w - (-0.0942)) <= 1e-4);
  for (double eta : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    CHECK(std::abs(wigner_value(DensityMatrix::lossy_single_photon(eta), 0.0, 0.0) -
                   (2.0 / oracle::kPi) * (1.0 - 2.0 * eta)) <= 1e-12);
  }
  // diag(0.426, 0.572) alone gives (2/pi)(0.426 - 0.572).
  const std::vector<double> two{0.426, 0.572, 0.0, 0.0};
  CHECK(wigner_value(DensityMatrix::diagonal(two), 0.0, 0.0) ==
        doctest::Approx((2.0 / oracle::kPi) * (0.426 - 0.572)).epsilon(1e-13));
}

TEST_CASE("Fock-state Wigner functions match the Laguerre form") {
  for (unsigned n = 0; n <= 15; ++n) {
    const auto rho = DensityMatrix::fock(static_cast<int>(n));
    for (double x : {0.0, 0.3, 1.1}) {
      for (double y : {0.0, -0.7}) {
        CHECK(wigner_value(rho, x, y) == doctest::Approx(fock_wigner(n, x * x + y * y)).epsilon(1e-11).scale(1.0));
      }
    }
  }
  CHECK_THROWS_AS(wigner_value(DensityMatrix::fock(16), 0.0, 0.0), UnsupportedOrderError);
}

TEST_CASE("closed-form section of the lossy single photon") {
  const auto xs = linspace(-3.0, 3.0, 61);
  const auto closed = lossy_single_photon_section(kEta, xs);
  const auto dm = wigner_from_dm(DensityMatrix::lossy_single_photon(kEta), xs);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(closed.w[i] == doctest::Approx(dm.w[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("property: Wigner normalization and bound") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = linspace(-4.0, 4.0, 321);
  const double h = grid[1] - grid[0];
  for (int trial = 0; trial < 4; ++trial) {
    const int dim = 2 + 3 * trial;  // up to 11
    std::vector<double> p(dim);
    double sum = 0.0;
    for (auto& v : p) sum += (v = u(gen));
    for (auto& v : p) v /= sum;
    const auto rho = DensityMatrix::diagonal(p);
    const auto w = wigner_grid(rho, grid, grid);
    double total = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double wi = (i == 0 || i == grid.size() - 1) ? 0.5 : 1.0;
        const double wj = (j == 0 || j == grid.size() - 1) ? 0.5 : 1.0;
        total += wi * wj * w[i][j];
        peak = std::max(peak, std::abs(w[i][j]));
      }
    }
    total *= h * h;
    CHECK(std::abs(total - 1.0) <= 1e-3);
    CHECK(peak <= 2.0 / oracle::kPi + 1e-9);
  }
}

TEST_CASE("property: integrating the Wigner function gives the marginal") {
  const auto rho = DensityMatrix::lossy_single_photon(kEta);
  for (double x = -2.5; x <= 2.5; x += 0.25) {
    const double p = oracle::integrate([&](double y) { return wigner_value(rho, x, y); }, -6.0, 6.0, 1e-12);
    CHECK(std::abs(p - marginal_pdf(rho, x, PhaseAngle(0.0))) <= 1e-4);
  }

  // Complex superposition: the theta = pi/2 quadrature is the y axis.
  const std::vector<std::complex<double>> amps{{0.6, 0.0}, {0.0, 0.64}, {0.3, -0.3464}};
  const auto sup = DensityMatrix::pure(amps);
  for (double q = -2.0; q <= 2.0; q += 0.5) {
    const double p0 = oracle::integrate([&](double y) { return wigner_value(sup, q, y); }, -6.0, 6.0, 1e-12);
    const double p90 = oracle::integrate([&](double x) { return wigner_value(sup, x, q); }, -6.0, 6.0, 1e-12);
    CHECK(std::abs(p0 - marginal_pdf(sup, q, PhaseAngle(0.0))) <= 1e-4);
    CHECK(std::abs(p90 - marginal_pdf(sup, q, PhaseAngle(oracle::kPi / 2))) <= 1e-4);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("Abel inversion of exact marginals") {
  const auto vac = abel_invert(exact_histogram(0.0, 0.05, 1e12));
  REQUIRE(vac.x.front() == 0.0);
  CHECK(std::abs(vac.w.front() / (2.0 / oracle::kPi) - 1.0) <= 0.02);

  const auto lossy = abel_invert(exact_histogram(kEta, 0.05, 1e12));
  CHECK(std::abs(lossy.w.front() / -0.0942 - 1.0) <= 0.05);

  // Away from the origin the profile follows the closed form too.
  for (std::size_t j = 10; j < 40; j += 10) {
    const double truth = lossy_single_photon_section(kEta, std::vector<double>{lossy.x[j]}).w[0];
    CHECK(std::abs(lossy.w[j] - truth) <= 0.01);
  }
}

TEST_CASE("Abel inversion needs enough points") {
  CHECK_THROWS_AS(abel_invert_profile(std::vector<double>(7, 0.1), 0.05), ResolutionError);
  CHECK_NOTHROW(abel_invert_profile(std::vector<double>(8, 0.1), 0.05));
  Histogram off_grid = exact_histogram(0.0, 0.05, 1e6);
  off_grid.center_offset += 0.01;
  CHECK_THROWS_AS(abel_invert(off_grid), DomainError);
}

TEST_CASE("section comparison") {
  const auto xs = linspace(0.0, 2.5, 51);
  const auto truth = lossy_single_photon_section(kEta, xs);
  auto shifted = truth;
  for (auto& w : shifted.w) w += 0.01;
  const auto rms = compare_sections(truth, shifted, truth);
  CHECK(rms.a == 0.0);
  CHECK(rms.b == doctest::Approx(0.01));

  auto other = truth;
  other.x[3] += 1e-6;
  CHECK_THROWS_AS(compare_sections(other, truth, truth), ComparisonError);
  CHECK_THROWS_AS(compare_sections(truth, other, truth), ComparisonError);

  const auto cut = truncate_section(truth, 1.0);
  CHECK(cut.x.size() == 21);
  CHECK(cut.x.back() == doctest::Approx(1.0));
}

TEST_CASE("Abel route scatters more than the density-matrix route") {
  const auto hist = build_histogram(run_samples());
  const auto abel = truncate_section(abel_invert(hist), 2.5);
  const auto est = dm_diagonal(run_samples());
  const auto dm = wigner_from_dm(DensityMatrix::diagonal(est.value), abel.x);
  const auto truth = lossy_single_photon_section(kEta, abel.x);
  const auto rms = compare_sections(abel, dm, truth);
  MESSAGE("rms abel " << rms.a << " dm " << rms.b);
  CHECK(rms.a > rms.b);
}

// ---------------------------------------------------------------------------

namespace {

/// Standard error of rho_11 from the Fisher information of the diagonal
/// mixture likelihood, over the populations the estimate actually uses.
double mle_stderr(std::span<const double> xs, const std::vector<double>& rho, int target) {
  std::vector<int> free;
  for (int n = 1; n < static_cast<int>(rho.size()); ++n)
    if (rho[n] > 1e-3) free.push_back(n);
  const auto k = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd fisher = Eigen::MatrixXd::Zero(k, k);
  for (double x : xs) {
    std::vector<double> p(rho.size());
    double like = 0.0;
    for (std::size_t n = 0; n < rho.size(); ++n) like += rho[n] * (p[n] = std::pow(oracle::psi(n, x), 2));
    Eigen::VectorXd g(k);
    for (Eigen::Index a = 0; a < k; ++a) g[a] = (p[free[a]] - p[0]) / like;
    fisher += g * g.transpose();
  }
  const Eigen::MatrixXd cov = fisher.inverse();
  for (Eigen::Index a = 0; a < k; ++a)
    if (free[a] == target) return std::sqrt(cov(a, a));
  return 0.0;
}

}  // namespace

TEST_CASE("maximum-likelihood reconstruction") {
  const auto& xs = run_samples();
  const auto mle = mle_reconstruct(xs);
  CHECK(mle.iterations <= 2000);
  CHECK(std::abs(mle.rho.trace() - 1.0) <= 1e-10);
  CHECK(mle.rho.min_eigenvalue() >= -1e-10);
  CHECK(mle.rho.is_diagonal());
  REQUIRE(mle.log_likelihood.size() == static_cast<std::size_t>(mle.iterations) + 1);
  for (std::size_t i = 1; i < mle.log_likelihood.size(); ++i) {
    CHECK(mle.log_likelihood[i] >= mle.log_likelihood[i - 1] - 1e-9);
  }

  const auto pops = mle.rho.populations();
  const auto dm = dm_diagonal(xs);
  const double se_mle = mle_stderr(xs, pops, 1);
  const double combined = std::hypot(se_mle, dm.stderr_value[1]);
  MESSAGE("rho11 mle " << pops[1] << " +- " << se_mle << " dm " << dm.value[1] << " +- " << dm.stderr_value[1]);
  CHECK(std::abs(pops[1] - dm.value[1]) <= 2.0 * combined);
}

TEST_CASE("maximum likelihood on vacuum data and bad input") {
  const auto vac = sample_vacuum(50000, 13, Stream::Sampling);
  const auto mle = mle_reconstruct(vac, 6);
  CHECK(mle.rho.populations()[0] > 0.99);
  CHECK(std::abs(mle.rho.trace() - 1.0) <= 1e-10);

  auto bad = vac;
  bad[17] = 7.0;
  CHECK_THROWS_AS(mle_reconstruct(bad, 4), DataRangeError);
  CHECK_THROWS_AS(mle_reconstruct(std::vector<double>(100, 0.0)), DomainError);
}

TEST_CASE("property: MLE iterates stay physical for random data") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const std::vector<double> pops{0.3, 0.3, 0.2, 0.2};
    const auto xs = sample_quadratures(DensityMatrix::diagonal(pops), 20000, seed);
    const auto mle = mle_reconstruct(xs, 5, 300);
    CHECK(std::abs(mle.rho.trace() - 1.0) <= 1e-10);
    CHECK(mle.rho.min_eigenvalue() >= -1e-10);
    for (std::size_t i = 1; i < mle.log_likelihood.size(); ++i) {
      CHECK(mle.log_likelihood[i] >= mle.log_likelihood[i - 1] - 1e-9);
    }
  }
}
