#include "focktomo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "focktomo/errors.hpp"

namespace focktomo {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

std::size_t grid_points() {
  return static_cast<std::size_t>(
             std::lround((PatternFunctionTable::kGridMax - PatternFunctionTable::kGridMin) /
                         PatternFunctionTable::kGridStep)) +
         1;
}

// Composite Simpson weights for an odd number of equally spaced points.
std::vector<double> simpson_weights(std::size_t n, double h) {
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i] = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  for (auto& v : w) v *= h / 3.0;
  return w;
}

double psi_derivative(const std::vector<double>& psi, int n, double x) {
  return (n > 0 ? 2.0 * std::sqrt(static_cast<double>(n)) * psi[n - 1] : 0.0) - 2.0 * x * psi[n];
}

}  // namespace

// ---------------------------------------------------------------------------
// Efficiency fit

double lossy_marginal_bin_average(double center, double width, double eta) {
  const double lo = center - 0.5 * width;
  const double hi = center + 0.5 * width;
  return (lossy_marginal_cdf(hi, eta) - lossy_marginal_cdf(lo, eta)) / width;
}

EfficiencyFit fit_efficiency(const Histogram& hist) {
  if (hist.total < kMinFitSamples) {
    throw DomainError("efficiency fit needs at least " + std::to_string(kMinFitSamples) + " samples, histogram has " +
                      std::to_string(hist.total));
  }
  const double n_total = static_cast<double>(hist.total);
  const double w = hist.bin_width;
  const std::size_t bins = hist.size();

  // The bin-averaged model is affine in eta: m_k = a_k + eta * b_k.
  std::vector<double> a(bins), b(bins), d(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    a[k] = lossy_marginal_bin_average(hist.center(k), w, 0.0);
    b[k] = lossy_marginal_bin_average(hist.center(k), w, 1.0) - a[k];
    d[k] = hist.density(k);
  }

  EfficiencyFit fit;
  double eta = 0.5;
  for (int it = 1; it <= kMaxFitIterations; ++it) {
    double sbb = 0.0, sbr = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double expected = std::max(n_total * w * (a[k] + eta * b[k]), 1.0);
      const double weight = (n_total * w) * (n_total * w) / expected;
      sbb += weight * b[k] * b[k];
      sbr += weight * b[k] * (d[k] - a[k]);
    }
    if (!(sbb > 0.0)) throw FitError("efficiency fit is degenerate");
    const double next = sbr / sbb;
    fit.iterations = it;
    fit.stderr_eta = 1.0 / std::sqrt(sbb);
    const bool done = std::abs(next - eta) < 1e-12;
    eta = next;
    if (done) break;
    if (it == kMaxFitIterations) throw FitError("efficiency fit did not converge in 200 iterations");
  }
  if (eta < -0.05 || eta > 1.05) {
    throw ModelMismatchError("fitted efficiency " + std::to_string(eta) + " outside [-0.05, 1.05]");
  }
  fit.eta = eta;
  for (std::size_t k = 0; k < bins; ++k) {
    const double expected = std::max(n_total * w * (a[k] + eta * b[k]), 1.0);
    const double r = static_cast<double>(hist.counts[k]) - n_total * w * (a[k] + eta * b[k]);
    fit.chi2 += r * r / expected;
  }
  fit.dof = static_cast<int>(bins) - 1;
  return fit;
}

// ---------------------------------------------------------------------------
// Pattern functions

double PatternFunctionTable::operator()(double x) const {
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  const double pos = (x - kGridMin) / kGridStep;
  const auto i = std::min(static_cast<std::size_t>(pos), values.size() - 2);
  const double f = pos - static_cast<double>(i);
  return values[i] + f * (values[i + 1] - values[i]);
}

PatternFunctionTable pattern_function(int n) {
  if (n < 0) throw DomainError("negative pattern-function order");
  if (n > kMaxPatternOrder) throw UnsupportedOrderError(n, kMaxPatternOrder);

  constexpr double h = PatternFunctionTable::kGridStep;
  constexpr int substeps = 4;
  const std::size_t total = grid_points();
  const std::size_t half = (total - 1) / 2;  // index of x = 0
  const double energy_term = 2.0 * (2 * n + 1);
  auto potential = [&](double x) { return 4.0 * x * x - energy_term; };

  // phi'' = (4x^2 - 2(2n+1)) phi, integrated outward with RK4.
  const auto psi0 = fock_wavefunctions(n, 0.0);
  double phi = 0.0, dphi = 0.0;
  if (n % 2 == 0) {
    dphi = 2.0 / psi0[n];
  } else {
    phi = -2.0 / psi_derivative(psi0, n, 0.0);
  }

  std::vector<double> positive(half + 1);
  auto record = [&](std::size_t k, double x) {
    const auto psi = fock_wavefunctions(n, x);
    positive[k] = psi_derivative(psi, n, x) * phi + psi[n] * dphi;
  };
  record(0, 0.0);
  const double dt = h / substeps;
  for (std::size_t k = 1; k <= half; ++k) {
    double x = (k - 1) * h;
    for (int s = 0; s < substeps; ++s) {
      const double k1p = dphi, k1d = potential(x) * phi;
      const double k2p = dphi + 0.5 * dt * k1d, k2d = potential(x + 0.5 * dt) * (phi + 0.5 * dt * k1p);
      const double k3p = dphi + 0.5 * dt * k2d, k3d = potential(x + 0.5 * dt) * (phi + 0.5 * dt * k2p);
      const double k4p = dphi + dt * k3d, k4d = potential(x + dt) * (phi + dt * k3p);
      phi += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      dphi += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
      x += dt;
    }
    record(k, static_cast<double>(k) * h);
  }

  PatternFunctionTable t;
  t.order = n;
  t.grid.resize(total);
  t.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    t.grid[i] = PatternFunctionTable::kGridMin + static_cast<double>(i) * h;
    t.values[i] = positive[i >= half ? i - half : half - i];
  }
  return t;
}

const std::vector<PatternFunctionTable>& pattern_functions() {
  static const auto tables = [] {
    std::vector<PatternFunctionTable> v;
    for (int n = 0; n <= kMaxPatternOrder; ++n) v.push_back(pattern_function(n));
    return v;
  }();
  return tables;
}

double biorthogonality_error(int max_order) {
  if (max_order > kMaxPatternOrder) throw UnsupportedOrderError(max_order, kMaxPatternOrder);
  const auto& tables = pattern_functions();
  const auto& grid = tables.front().grid;
  const auto weights = simpson_weights(grid.size(), PatternFunctionTable::kGridStep);
  std::vector<std::vector<double>> psi2(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    psi2[i] = fock_wavefunctions(max_order, grid[i]);
    for (auto& p : psi2[i]) p *= p;
  }
  double worst = 0.0;
  for (int n = 0; n <= max_order; ++n) {
    for (int m = 0; m <= max_order; ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) s += weights[i] * psi2[i][m] * tables[n].values[i];
      worst = std::max(worst, std::abs(s - (n == m ? 1.0 : 0.0)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Density-matrix diagonal

DiagonalEstimate dm_diagonal(std::span<const double> xs, int max_n) {
  if (max_n < 0 || max_n > kMaxPatternOrder) throw UnsupportedOrderError(max_n, kMaxPatternOrder);
  if (xs.size() < kMinReconstructionSamples) {
    throw DomainError("diagonal estimate needs at least " + std::to_string(kMinReconstructionSamples) + " samples");
  }
  const auto& tables = pattern_functions();
  DiagonalEstimate est;
  const double count = static_cast<double>(xs.size());
  for (int n = 0; n <= max_n; ++n) {
    double sum = 0.0, sum_sq = 0.0;
    for (double x : xs) {
      const double f = tables[n](x);
      sum += f;
      sum_sq += f * f;
    }
    const double mean = sum / count;
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
    est.value.push_back(mean);
    est.stderr_value.push_back(std::sqrt(var / count));
  }
  return est;
}

std::vector<double> dm_diagonal_exact(const std::function<double(double)>& density, int max_n) {
  if (max_n < 0 || max_n > kMaxPatternOrder) throw UnsupportedOrderError(max_n, kMaxPatternOrder);
  const auto& tables = pattern_functions();
  const auto& grid = tables.front().grid;
  const auto weights = simpson_weights(grid.size(), PatternFunctionTable::kGridStep);
  std::vector<double> p(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) p[i] = density(grid[i]);
  std::vector<double> out;
  for (int n = 0; n <= max_n; ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) s += weights[i] * p[i] * tables[n].values[i];
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wigner function

double wigner_value(const DensityMatrix& rho, double x, double y) {
  const int dim = rho.dim();
  if (dim > kMaxWignerDim) throw UnsupportedOrderError(dim - 1, kMaxWignerDim - 1);
  const double r2 = x * x + y * y;
  const double z = 4.0 * r2;
  const double two_r = 2.0 * std::sqrt(r2);
  const double envelope = std::exp(-2.0 * r2);
  const double angle = (x == 0.0 && y == 0.0) ? 0.0 : std::atan2(y, x);

  double total = 0.0;
  double radial = 1.0;  // (2r)^d
  for (int d = 0; d < dim; ++d) {
    if (d > 0) {
      radial *= two_r;
      if (radial == 0.0) break;
    }
    // Generalized Laguerre L_n^d(z) by upward recurrence.
    double l_prev = 0.0, l_cur = 1.0;
    double ratio = 1.0;  // sqrt(n! / (n+d)!)
    for (int k = 1; k <= d; ++k) ratio /= std::sqrt(static_cast<double>(k));
    std::complex<double> inner{};
    for (int n = 0; n + d < dim; ++n) {
      if (n > 0) {
        const double next = ((2.0 * (n - 1) + 1.0 + d - z) * l_cur - (n - 1 + d) * l_prev) / n;
        l_prev = l_cur;
        l_cur = next;
        ratio *= std::sqrt(static_cast<double>(n) / (n + d));
      }
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      inner += sign * ratio * l_cur * rho(n, n + d);
    }
    const double kernel = (2.0 / std::numbers::pi) * (d == 0 ? 1.0 : 2.0) * radial * envelope;
    total += kernel * (std::polar(1.0, d * angle) * inner).real();
  }
  return total;
}

WignerSection wigner_from_dm(const DensityMatrix& rho, std::span<const double> xs, double y) {
  WignerSection s;
  s.x.assign(xs.begin(), xs.end());
  s.w.reserve(xs.size());
  for (double x : xs) s.w.push_back(wigner_value(rho, x, y));
  return s;
}

std::vector<std::vector<double>> wigner_grid(const DensityMatrix& rho, std::span<const double> xs,
                                             std::span<const double> ys) {
  std::vector<std::vector<double>> out(xs.size(), std::vector<double>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j) out[i][j] = wigner_value(rho, xs[i], ys[j]);
  return out;
}

WignerSection lossy_single_photon_section(double eta, std::span<const double> xs) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("efficiency outside [0, 1]");
  WignerSection s;
  s.x.assign(xs.begin(), xs.end());
  for (double x : xs) {
    const double r2 = x * x;
    s.w.push_back((2.0 / std::numbers::pi) * std::exp(-2.0 * r2) * ((1.0 - eta) - eta * (1.0 - 4.0 * r2)));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Abel inversion

WignerSection abel_invert_profile(std::span<const double> projection, double step) {
  if (projection.size() < kMinAbelBins) {
    throw ResolutionError("Abel inversion needs at least " + std::to_string(kMinAbelBins) +
                          " points on the positive axis, got " + std::to_string(projection.size()));
  }
  if (!(step > 0.0)) throw DomainError("Abel grid step must be positive");
  const std::size_t n = projection.size();
  auto p = [&](std::size_t k) { return k < n ? projection[k] : 0.0; };

  // The projection is taken linear in x^2 between nodes, which gives
  // W(r_j) = -(2 / (pi a)) sum_{k>=j} (P_{k+1} - P_k) A_jk / (2k + 1),
  // A_jk = sqrt((k+1)^2 - j^2) - sqrt(k^2 - j^2).
  WignerSection s;
  s.x.resize(n);
  s.w.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double jj = static_cast<double>(j) * static_cast<double>(j);
    double sum = 0.0;
    for (std::size_t k = j; k < n; ++k) {
      const double kd = static_cast<double>(k);
      const double a_jk = std::sqrt((kd + 1.0) * (kd + 1.0) - jj) - std::sqrt(std::max(0.0, kd * kd - jj));
      sum += (p(k + 1) - p(k)) * a_jk / (2.0 * kd + 1.0);
    }
    s.x[j] = static_cast<double>(j) * step;
    s.w[j] = -2.0 / (std::numbers::pi * step) * sum;
  }
  return s;
}

WignerSection abel_invert(const Histogram& hist) {
  if (hist.size() == 0 || hist.total == 0) throw HistogramError("empty histogram");
  const double w = hist.bin_width;
  const double offset_bins = hist.center_offset / w;
  const long long first = std::llround(offset_bins);
  if (std::abs(offset_bins - static_cast<double>(first)) > 1e-6) {
    throw DomainError("histogram bins are not centered on multiples of the bin width");
  }
  const long long last = first + static_cast<long long>(hist.size()) - 1;
  const long long reach = std::max(std::llabs(first), std::llabs(last));
  auto density_at = [&](long long k) {
    if (k < first || k > last) return 0.0;
    return hist.density(static_cast<std::size_t>(k - first));
  };
  std::vector<double> profile(static_cast<std::size_t>(reach + 1));
  for (long long k = 0; k <= reach; ++k) profile[k] = 0.5 * (density_at(k) + density_at(-k));
  return abel_invert_profile(profile, w);
}

// ---------------------------------------------------------------------------
// Maximum likelihood

MleResult mle_reconstruct(std::span<const double> xs, int max_n, int max_iters, double tol) {
  if (max_n < 0 || max_n > kMaxPatternOrder) throw UnsupportedOrderError(max_n, kMaxPatternOrder);
  if (xs.size() < kMinReconstructionSamples) {
    throw DomainError("maximum likelihood needs at least " + std::to_string(kMinReconstructionSamples) + " samples");
  }
  if (max_iters < 1) throw DomainError("max_iters must be positive");
  const std::size_t dim = static_cast<std::size_t>(max_n) + 1;
  const std::size_t count = xs.size();

  // Phase-averaged projector diagonals psi_n(x_i)^2, sample-major.
  std::vector<double> proj(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = xs[i];
    if (!(x >= PatternFunctionTable::kGridMin && x <= PatternFunctionTable::kGridMax)) {
      throw DataRangeError("sample " + std::to_string(i) + " = " + std::to_string(x) + " outside [-6, 6]");
    }
    const auto psi = fock_wavefunctions(max_n, x);
    for (std::size_t n = 0; n < dim; ++n) proj[i * dim + n] = psi[n] * psi[n];
  }

  std::vector<double> prob(count);
  auto log_likelihood = [&](const std::vector<double>& rho) {
    double ll = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      double p = 0.0;
      for (std::size_t n = 0; n < dim; ++n) p += rho[n] * proj[i * dim + n];
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw DataRangeError("non-finite likelihood at sample " + std::to_string(i));
      }
      prob[i] = p;
      ll += std::log(p);
    }
    return ll;
  };

  std::vector<double> rho(dim, 1.0 / static_cast<double>(dim));
  MleResult result;
  double ll = log_likelihood(rho);
  result.log_likelihood.push_back(ll);

  std::vector<double> r(dim), candidate(dim);
  for (int it = 0; it < max_iters; ++it) {
    // prob[] holds the probabilities of the current iterate.
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t i = 0; i < count; ++i) {
      const double inv = 1.0 / prob[i];
      for (std::size_t n = 0; n < dim; ++n) r[n] += proj[i * dim + n] * inv;
    }
    for (auto& v : r) v /= static_cast<double>(count);

    double eps = 0.0;  // 0 means the undiluted R rho R step
    double next_ll = 0.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
      double norm = 0.0;
      for (std::size_t n = 0; n < dim; ++n) {
        const double g = eps == 0.0 ? r[n] : (1.0 + eps * r[n]) / (1.0 + eps);
        candidate[n] = g * g * rho[n];
        norm += candidate[n];
      }
      for (auto& v : candidate) v /= norm;
      next_ll = log_likelihood(candidate);
      if (next_ll >= ll) break;
      eps = eps == 0.0 ? 1.0 : 0.5 * eps;
    }
    if (next_ll < ll) {
      // No ascent direction left at double precision; restore prob[] and stop.
      log_likelihood(rho);
      result.converged = true;
      break;
    }
    const double gain = next_ll - ll;
    rho = candidate;
    ll = next_ll;
    result.log_likelihood.push_back(ll);
    result.iterations = it + 1;
    if (gain < tol) {
      result.converged = true;
      break;
    }
  }
  result.rho = DensityMatrix::diagonal(rho);
  return result;
}

// ---------------------------------------------------------------------------
// Comparison

SectionRms compare_sections(const WignerSection& a, const WignerSection& b, const WignerSection& truth) {
  auto same_grid = [&](const WignerSection& s) {
    if (s.x.size() != truth.x.size() || s.w.size() != s.x.size()) return false;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::abs(s.x[i] - truth.x[i]) > 1e-12) return false;
    return true;
  };
  if (truth.w.size() != truth.x.size() || truth.x.empty()) throw ComparisonError("reference section is empty");
  if (!same_grid(a)) throw ComparisonError("first section grid differs from reference grid");
  if (!same_grid(b)) throw ComparisonError("second section grid differs from reference grid");
  auto rms = [&](const WignerSection& s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.w.size(); ++i) sum += (s.w[i] - truth.w[i]) * (s.w[i] - truth.w[i]);
    return std::sqrt(sum / static_cast<double>(s.w.size()));
  };
  return {rms(a), rms(b)};
}

WignerSection truncate_section(const WignerSection& s, double x_max) {
  WignerSection out;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.x[i] <= x_max + 1e-12) {
      out.x.push_back(s.x[i]);
      out.w.push_back(s.w[i]);
    }
  }
  return out;
}

}  // namespace focktomo
