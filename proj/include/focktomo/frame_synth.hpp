#pragma once

// Monte Carlo quadrature sampling and synthetic digitizer frames.
//
// Each frame carries two LO pulses: the first is heralded and carries the
// signal quadrature, the second is a vacuum reference ("dark" pulse). Areas
// are in digitizer units times samples.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "focktomo/rng.hpp"
#include "focktomo/state_model.hpp"

namespace focktomo {

struct AcquisitionSpec {
  int samples_per_frame = 250;
  double sample_period = 1e-10;      ///< s (10 GS/s)
  int adc_bits = 8;
  double rep_period = 1.0 / 82e6;    ///< s
  double pulse_fwhm = 2e-9;          ///< s; detector impulse response, assumed Gaussian
  int signal_pulse_center = 60;
  int dark_pulse_center = 182;
  double lo_power_mw = 7.0;
  double sn_ratio_db = 12.0;         ///< dark-area variance over electronic-area variance; +inf disables noise
  double area_gain = 600.0;          ///< area units per quadrature unit at lo_power_mw

  /// Throws SpecError if pulses or windows do not fit, or the pulse spacing
  /// disagrees with rep_period / sample_period.
  void validate() const;

  double pulse_sigma_samples() const;
  /// Integration half-width around each pulse center: 3 FWHM, in samples.
  int window_half_width() const;
  int window_length() const { return 2 * window_half_width() + 1; }
  int max_code() const { return (1 << adc_bits) - 1; }
  int mid_code() const { return 1 << (adc_bits - 1); }
  /// Per-sample electronic-noise standard deviation (digitizer units) that
  /// puts the dark-area variance sn_ratio_db above the electronic-noise area
  /// variance at lo_power_mw.
  double electronic_noise_sigma() const;
  /// After vacuum-referenced calibration, white electronic noise is
  /// equivalent to a loss channel with this transmission: 1 - 10^(-dB/10).
  double electronic_efficiency() const;
};

struct FrameRecord {
  std::uint64_t index = 0;
  std::vector<std::uint16_t> samples;

  bool operator==(const FrameRecord&) const = default;
};

/// Inverse-CDF sampler for the phase-averaged marginal of a state.
///
/// The cumulative is tabulated on [-6, 6] with step 1e-3 and inverted by
/// linear interpolation.
class QuadratureSampler {
 public:
  static constexpr double kGridMin = -6.0;
  static constexpr double kGridMax = 6.0;
  static constexpr double kGridStep = 1e-3;

  explicit QuadratureSampler(const DensityMatrix& state);

  double operator()(Engine& engine) const;
  /// Map u in [0,1) to a quadrature value.
  double invert(double u) const;

 private:
  std::vector<double> grid_;
  std::vector<double> cdf_;
};

/// n i.i.d. draws from the phase-averaged marginal of `state`.
std::vector<double> sample_quadratures(const DensityMatrix& state, std::size_t n, std::uint64_t seed,
                                       Stream stream = Stream::Sampling);

/// n draws from the vacuum marginal (variance 1/4).
std::vector<double> sample_vacuum(std::size_t n, std::uint64_t seed, Stream stream);

struct SynthesisResult {
  std::vector<FrameRecord> frames;
  std::size_t clipped_samples = 0;
  std::size_t total_samples = 0;
  /// More than 0.1% of samples hit the ADC rails.
  bool clipping_warning = false;
};

/// Per-frame knobs for rendering a single trace.
struct PulseDrive {
  double signal_area = 0.0;
  double dark_area = 0.0;
  double noise_sigma = 0.0;  ///< per-sample electronic noise, digitizer units
};

/// Renders frames for a fixed acquisition geometry.
class FrameRenderer {
 public:
  explicit FrameRenderer(const AcquisitionSpec& spec);

  /// `noise` is only consumed when drive.noise_sigma > 0. Adds the number of
  /// clipped samples to *clipped when non-null.
  FrameRecord operator()(std::uint64_t index, const PulseDrive& drive, Engine& noise,
                         std::size_t* clipped = nullptr) const;

  const AcquisitionSpec& spec() const noexcept { return spec_; }

 private:
  AcquisitionSpec spec_;
  std::vector<double> signal_shape_;
  std::vector<double> dark_shape_;
};

/// One frame per quadrature value. Dark pulses carry independent vacuum
/// draws; electronic noise follows spec.sn_ratio_db.
SynthesisResult synthesize_frames(std::span<const double> xs, const AcquisitionSpec& spec, std::uint64_t seed);

/// Same as synthesize_frames but with caller-provided dark quadratures.
SynthesisResult synthesize_frames(std::span<const double> xs, std::span<const double> dark_xs,
                                  const AcquisitionSpec& spec, std::uint64_t seed);

}  // namespace focktomo
