#pragma once

// State reconstruction from phase-averaged homodyne data: efficiency fit,
// pattern-function density-matrix estimation, Wigner synthesis, Abel
// inversion and a diagonal maximum-likelihood estimator.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "focktomo/pulse_ingest.hpp"
#include "focktomo/state_model.hpp"

namespace focktomo {

inline constexpr int kMaxPatternOrder = 10;
inline constexpr int kDefaultMaxN = 10;
inline constexpr int kMaxWignerDim = 16;
/// Smallest sample list accepted by dm_diagonal and mle_reconstruct.
inline constexpr std::size_t kMinReconstructionSamples = 10000;

// ---------------------------------------------------------------------------
// Efficiency fit

struct EfficiencyFit {
  double eta = 0.0;
  double stderr_eta = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;
};

inline constexpr int kMaxFitIterations = 200;
inline constexpr std::uint64_t kMinFitSamples = 10000;

/// Weighted least squares of bin densities against the lossy single-photon
/// marginal, one free parameter, Poisson weights from the current model.
/// The model is averaged over each bin exactly.
EfficiencyFit fit_efficiency(const Histogram& hist);

/// Model density averaged over the bin [center - w/2, center + w/2].
double lossy_marginal_bin_average(double center, double width, double eta);

// ---------------------------------------------------------------------------
// Pattern functions

/// pi f_nn(x) tabulated on [-6, 6] with step 1e-3.
struct PatternFunctionTable {
  static constexpr double kGridMin = -6.0;
  static constexpr double kGridMax = 6.0;
  static constexpr double kGridStep = 1e-3;

  int order = 0;
  std::vector<double> grid;
  std::vector<double> values;

  /// Linear interpolation; the edge value is used beyond the grid.
  double operator()(double x) const;
};

/// Built from the irregular oscillator solution phi_n integrated outward
/// from the origin with Wronskian psi_n phi_n' - psi_n' phi_n = 2, so that
/// pi f_nn = d/dx (psi_n phi_n) is bi-orthogonal to psi_m^2.
PatternFunctionTable pattern_function(int n);

/// Cached tables for orders 0..kMaxPatternOrder.
const std::vector<PatternFunctionTable>& pattern_functions();

/// max over n,m <= max_order of |int psi_m^2 pi f_nn dx - delta_nm|.
double biorthogonality_error(int max_order = kMaxPatternOrder);

// ---------------------------------------------------------------------------
// Density-matrix diagonal

struct DiagonalEstimate {
  std::vector<double> value;
  std::vector<double> stderr_value;
};

/// Sample mean of pi f_nn over the quadratures, n = 0..max_n.
DiagonalEstimate dm_diagonal(std::span<const double> xs, int max_n = kDefaultMaxN);

/// Deterministic variant: integrates pi f_nn against a density on the grid.
std::vector<double> dm_diagonal_exact(const std::function<double(double)>& density, int max_n = kDefaultMaxN);

// ---------------------------------------------------------------------------
// Wigner function

struct WignerSection {
  std::vector<double> x;
  std::vector<double> w;
};

double wigner_value(const DensityMatrix& rho, double x, double y);

/// W(x, y) along a line of fixed y.
WignerSection wigner_from_dm(const DensityMatrix& rho, std::span<const double> xs, double y = 0.0);

/// W on the tensor grid; result[i][j] = W(xs[i], ys[j]).
std::vector<std::vector<double>> wigner_grid(const DensityMatrix& rho, std::span<const double> xs,
                                             std::span<const double> ys);

/// W(x, 0) of (1-eta)|0><0| + eta|1><1| in closed form.
WignerSection lossy_single_photon_section(double eta, std::span<const double> xs);

// ---------------------------------------------------------------------------
// Abel inversion

inline constexpr std::size_t kMinAbelBins = 8;

/// Nestor-Olsen inversion of a radially symmetric projection sampled at
/// x_k = k * step, k = 0..N-1 (zero beyond). Returns W(r_j), r_j = j * step.
WignerSection abel_invert_profile(std::span<const double> projection, double step);

/// Symmetrizes the histogram density about 0 and inverts it. Bins must be
/// centered on multiples of the bin width.
WignerSection abel_invert(const Histogram& hist);

// ---------------------------------------------------------------------------
// Maximum likelihood

struct MleResult {
  DensityMatrix rho = DensityMatrix::vacuum();
  std::vector<double> log_likelihood;  ///< one entry per iterate, starting with the initial guess
  int iterations = 0;
  bool converged = false;
};

/// Iterates rho <- N[R rho R] on the diagonal subspace. A step that would
/// lower the likelihood is replaced by a diluted step (1 + eps R)/(1 + eps)
/// with eps halved until the likelihood does not decrease.
MleResult mle_reconstruct(std::span<const double> xs, int max_n = kDefaultMaxN, int max_iters = 2000,
                          double tol = 1e-6);

// ---------------------------------------------------------------------------
// Comparison

struct SectionRms {
  double a = 0.0;
  double b = 0.0;
};

/// RMS deviation of each section from truth. Grids must match exactly.
SectionRms compare_sections(const WignerSection& a, const WignerSection& b, const WignerSection& truth);

/// Section restricted to x <= x_max.
WignerSection truncate_section(const WignerSection& s, double x_max);

}  // namespace focktomo
