#include "focktomo/state_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "focktomo/errors.hpp"

namespace focktomo {

namespace {

constexpr double kHermitianTolerance = 1e-12;
constexpr double kRescaleThreshold = 1e150;

void check_efficiency(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw DomainError("efficiency " + std::to_string(eta) + " outside [0, 1]");
  }
}

void check_order(int n) {
  if (n < 0) throw DomainError("negative Fock order " + std::to_string(n));
  if (n > kMaxFockOrder) throw UnsupportedOrderError(n, kMaxFockOrder);
}

// Exact binomial table, rows 0..kMaxFockOrder.
const std::vector<std::vector<double>>& binomials() {
  static const auto table = [] {
    std::vector<std::vector<double>> t(kMaxFockOrder + 1);
    for (int n = 0; n <= kMaxFockOrder; ++n) {
      t[n].assign(n + 1, 1.0);
      for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
    }
    return t;
  }();
  return table;
}

}  // namespace

PhaseAngle::PhaseAngle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(radians, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  theta_ = t;
}

DensityMatrix::DensityMatrix(const Eigen::MatrixXcd& elements) : rho_(elements) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0) {
    throw DomainError("density matrix must be square and non-empty");
  }
  const Eigen::Index d = rho_.rows();
  for (Eigen::Index n = 0; n < d; ++n) {
    if (std::abs(rho_(n, n).imag()) > kHermitianTolerance) {
      throw DomainError("density matrix diagonal must be real");
    }
    rho_(n, n) = rho_(n, n).real();
    for (Eigen::Index m = n + 1; m < d; ++m) {
      if (std::abs(rho_(n, m) - std::conj(rho_(m, n))) > kHermitianTolerance) {
        throw DomainError("density matrix is not Hermitian at (" + std::to_string(n) + ", " +
                          std::to_string(m) + ")");
      }
      rho_(m, n) = std::conj(rho_(n, m));
    }
  }
}

DensityMatrix DensityMatrix::fock(int n, int dim) {
  check_order(n);
  if (dim == 0) dim = n + 1;
  if (dim <= n) throw DomainError("dimension too small for requested Fock state");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  m(n, n) = 1.0;
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> populations) {
  const auto d = static_cast<Eigen::Index>(populations.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index n = 0; n < d; ++n) m(n, n) = populations[n];
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::pure(std::span<const std::complex<double>> amplitudes) {
  const auto d = static_cast<Eigen::Index>(amplitudes.size());
  Eigen::VectorXcd c(d);
  for (Eigen::Index n = 0; n < d; ++n) c(n) = amplitudes[n];
  return DensityMatrix(c * c.adjoint());
}

DensityMatrix DensityMatrix::lossy_single_photon(double eta) {
  check_efficiency(eta);
  const double p[] = {1.0 - eta, eta};
  return diagonal(p);
}

std::vector<double> DensityMatrix::populations() const {
  std::vector<double> p(dim());
  for (int n = 0; n < dim(); ++n) p[n] = rho_(n, n).real();
  return p;
}

double DensityMatrix::trace() const { return rho_.diagonal().real().sum(); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool DensityMatrix::is_diagonal() const {
  for (int n = 0; n < dim(); ++n)
    for (int m = n + 1; m < dim(); ++m)
      if (rho_(n, m) != std::complex<double>{}) return false;
  return true;
}

DensityMatrix DensityMatrix::resized(int dim) const {
  if (dim <= 0) throw DomainError("dimension must be positive");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  const int k = std::min(dim, this->dim());
  m.topLeftCorner(k, k) = rho_.topLeftCorner(k, k);
  return DensityMatrix(m);
}

nlohmann::json to_json(const DensityMatrix& rho) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (int n = 0; n < rho.dim(); ++n) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ir = nlohmann::json::array();
    for (int m = 0; m < rho.dim(); ++m) {
      rr.push_back(rho(n, m).real());
      ir.push_back(rho(n, m).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  return {{"dim", rho.dim()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

DensityMatrix density_matrix_from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (dim <= 0 || re.size() != static_cast<std::size_t>(dim) || im.size() != static_cast<std::size_t>(dim)) {
    throw DomainError("density matrix JSON: row count does not match dim");
  }
  Eigen::MatrixXcd m(dim, dim);
  for (int n = 0; n < dim; ++n) {
    if (re[n].size() != static_cast<std::size_t>(dim) || im[n].size() != static_cast<std::size_t>(dim)) {
      throw DomainError("density matrix JSON: column count does not match dim in row " + std::to_string(n));
    }
    for (int k = 0; k < dim; ++k) m(n, k) = {re[n][k].get<double>(), im[n][k].get<double>()};
  }
  return DensityMatrix(m);
}

std::vector<double> fock_wavefunctions(int max_n, double x) {
  check_order(max_n);
  // Normalized Hermite functions h_k(u), u = sqrt(2) x, with the Gaussian
  // envelope carried as a separate log-scale so large |x| never underflows
  // before the polynomial growth has caught up.
  const double u = std::numbers::sqrt2 * x;
  const double amplitude = std::pow(2.0, 0.25);
  double log_scale = -0.5 * u * u;
  double prev = 0.0;
  double cur = 1.0 / std::pow(std::numbers::pi, 0.25);

  std::vector<double> psi(max_n + 1);
  psi[0] = amplitude * cur * std::exp(log_scale);
  for (int k = 0; k < max_n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * u * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleThreshold) {
      cur /= kRescaleThreshold;
      prev /= kRescaleThreshold;
      log_scale += std::log(kRescaleThreshold);
    }
    psi[k + 1] = amplitude * cur * std::exp(log_scale);
  }
  return psi;
}

double fock_wavefunction(int n, double x) { return fock_wavefunctions(n, x)[n]; }

double marginal_pdf(const DensityMatrix& state, double x, PhaseAngle theta) {
  const int d = state.dim();
  const auto psi = fock_wavefunctions(d - 1, x);
  const double t = theta.radians();
  double p = 0.0;
  for (int n = 0; n < d; ++n) {
    p += state(n, n).real() * psi[n] * psi[n];
    for (int m = n + 1; m < d; ++m) {
      // The (n,m) and (m,n) terms are complex conjugates of each other.
      const auto phase = std::polar(1.0, -(n - m) * t);
      p += 2.0 * (state(n, m) * phase).real() * psi[n] * psi[m];
    }
  }
  return p;
}

double phase_averaged_pdf(std::span<const double> populations, double x) {
  if (populations.empty()) return 0.0;
  const auto psi = fock_wavefunctions(static_cast<int>(populations.size()) - 1, x);
  double p = 0.0;
  for (std::size_t n = 0; n < populations.size(); ++n) p += populations[n] * psi[n] * psi[n];
  return p;
}

double lossy_marginal(double x, double eta) {
  check_efficiency(eta);
  const double norm = std::sqrt(2.0 / std::numbers::pi);
  return norm * (1.0 - eta * (1.0 - 4.0 * x * x)) * std::exp(-2.0 * x * x);
}

double lossy_marginal_cdf(double x, double eta) {
  check_efficiency(eta);
  const double gaussian_cdf = 0.5 * std::erfc(-std::numbers::sqrt2 * x);
  return gaussian_cdf - eta * std::sqrt(2.0 / std::numbers::pi) * x * std::exp(-2.0 * x * x);
}

DensityMatrix apply_loss(const DensityMatrix& state, double eta) {
  check_efficiency(eta);
  const int d = state.dim();
  if (d - 1 > kMaxFockOrder) throw UnsupportedOrderError(d - 1, kMaxFockOrder);
  const auto& binom = binomials();

  std::vector<double> eta_pow(d), loss_pow(d);
  for (int k = 0; k < d; ++k) {
    eta_pow[k] = std::pow(eta, k);
    loss_pow[k] = std::pow(1.0 - eta, k);
  }

  // rho'_{m,m'} = sum_k sqrt(C(m+k,k) C(m'+k,k) eta^{m+m'}) (1-eta)^k rho_{m+k,m'+k}
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int m = 0; m < d; ++m) {
    for (int mp = m; mp < d; ++mp) {
      std::complex<double> acc{};
      for (int k = 0; mp + k < d; ++k) {
        const double coeff = std::sqrt(binom[m + k][k] * binom[mp + k][k] * eta_pow[m] * eta_pow[mp]) * loss_pow[k];
        acc += coeff * state(m + k, mp + k);
      }
      out(m, mp) = acc;
      out(mp, m) = std::conj(acc);
    }
  }
  return DensityMatrix(out);
}

}  // namespace focktomo
