#pragma once

// Fock-basis states, oscillator eigenfunctions, quadrature marginals and the
// photon-loss channel.
//
// Quadratures use the convention x = (a + a^dagger)/2, so the vacuum marginal
// has variance 1/4 and reads sqrt(2/pi) exp(-2 x^2).

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace focktomo {

inline constexpr double kVacuumVariance = 0.25;

/// Highest Fock order accepted by the wavefunction evaluators.
inline constexpr int kMaxFockOrder = 60;

/// LO phase in radians, wrapped into [0, 2pi) on construction.
class PhaseAngle {
 public:
  constexpr PhaseAngle() = default;
  explicit PhaseAngle(double radians);
  double radians() const noexcept { return theta_; }

 private:
  double theta_ = 0.0;
};

/// Truncated density matrix in the Fock basis, indices 0..dim-1.
///
/// The stored matrix is exactly Hermitian: the lower triangle is always the
/// conjugate of the upper one. Constructors reject inputs that are not
/// Hermitian to within 1e-12.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Eigen::MatrixXcd& elements);

  /// |n><n| embedded in a space of dimension `dim` (default n+1).
  static DensityMatrix fock(int n, int dim = 0);
  static DensityMatrix vacuum(int dim = 1) { return fock(0, dim); }
  static DensityMatrix diagonal(std::span<const double> populations);
  /// |psi><psi| for the given Fock amplitudes (not renormalized).
  static DensityMatrix pure(std::span<const std::complex<double>> amplitudes);
  /// (1-eta)|0><0| + eta|1><1|.
  static DensityMatrix lossy_single_photon(double eta);

  int dim() const noexcept { return static_cast<int>(rho_.rows()); }
  std::complex<double> operator()(int n, int m) const { return rho_(n, m); }
  const Eigen::MatrixXcd& elements() const noexcept { return rho_; }

  std::vector<double> populations() const;
  double trace() const;
  double min_eigenvalue() const;
  bool is_diagonal() const;

  /// Zero-padded or truncated copy with the requested dimension.
  DensityMatrix resized(int dim) const;

 private:
  Eigen::MatrixXcd rho_;
};

/// {"dim": n, "re": [[...]], "im": [[...]]}, row-major.
nlohmann::json to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const nlohmann::json& j);

/// psi_n(x) for the variance-1/4 convention.
double fock_wavefunction(int n, double x);

/// psi_0(x) .. psi_max_n(x) in one pass of the three-term recurrence.
std::vector<double> fock_wavefunctions(int max_n, double x);

/// p(x, theta) for an arbitrary density matrix.
double marginal_pdf(const DensityMatrix& state, double x, PhaseAngle theta);

/// Phase-averaged marginal: only the diagonal of the state contributes.
double phase_averaged_pdf(std::span<const double> populations, double x);

/// Marginal of (1-eta)|0><0| + eta|1><1| in closed form.
double lossy_marginal(double x, double eta);

/// Cumulative distribution of lossy_marginal.
double lossy_marginal_cdf(double x, double eta);

/// Bernoulli photon-loss channel with transmission eta.
DensityMatrix apply_loss(const DensityMatrix& state, double eta);

}  // namespace focktomo
