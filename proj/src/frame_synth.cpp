#include "focktomo/frame_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "focktomo/errors.hpp"

namespace focktomo {

namespace {

constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))
constexpr double kClipWarningFraction = 1e-3;

std::vector<double> pulse_template(const AcquisitionSpec& spec, int center) {
  const double sigma = spec.pulse_sigma_samples();
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> t(spec.samples_per_frame);
  for (int k = 0; k < spec.samples_per_frame; ++k) {
    const double d = (k - center) / sigma;
    t[k] = norm * std::exp(-0.5 * d * d);
  }
  return t;
}

}  // namespace

void AcquisitionSpec::validate() const {
  if (samples_per_frame <= 0) throw SpecError("samples_per_frame must be positive");
  if (!(sample_period > 0.0)) throw SpecError("sample_period must be positive");
  if (adc_bits < 1 || adc_bits > 16) throw SpecError("adc_bits must be in [1, 16]");
  if (!(rep_period > 0.0)) throw SpecError("rep_period must be positive");
  if (!(pulse_fwhm > 0.0)) throw SpecError("pulse_fwhm must be positive");
  if (!(area_gain > 0.0)) throw SpecError("area_gain must be positive");
  if (!(lo_power_mw > 0.0)) throw SpecError("lo_power_mw must be positive");
  if (!(sn_ratio_db > 0.0)) throw SpecError("sn_ratio_db must be positive");

  const int half = window_half_width();
  for (int center : {signal_pulse_center, dark_pulse_center}) {
    if (center - half < 0 || center + half > samples_per_frame - 1) {
      throw SpecError("pulse centered at sample " + std::to_string(center) + " with +/-" + std::to_string(half) +
                      " sample window does not fit in a " + std::to_string(samples_per_frame) + "-sample frame");
    }
  }
  const long spacing = std::lround(rep_period / sample_period);
  if (dark_pulse_center - signal_pulse_center != spacing) {
    throw SpecError("dark - signal pulse spacing " + std::to_string(dark_pulse_center - signal_pulse_center) +
                    " differs from repetition period " + std::to_string(spacing) + " samples");
  }
  if (signal_pulse_center + half >= dark_pulse_center - half) {
    throw SpecError("signal and dark integration windows overlap");
  }
}

double AcquisitionSpec::pulse_sigma_samples() const { return kFwhmToSigma * pulse_fwhm / sample_period; }

int AcquisitionSpec::window_half_width() const {
  return static_cast<int>(std::lround(3.0 * pulse_fwhm / sample_period));
}

double AcquisitionSpec::electronic_noise_sigma() const {
  if (std::isinf(sn_ratio_db)) return 0.0;
  const double shot_area_variance = area_gain * area_gain * kVacuumVariance;
  const double ratio = std::pow(10.0, sn_ratio_db / 10.0);
  // (shot + elec) / elec = ratio, elec = sigma^2 * window_length
  const double elec_area_variance = shot_area_variance / (ratio - 1.0);
  return std::sqrt(elec_area_variance / window_length());
}

double AcquisitionSpec::electronic_efficiency() const {
  if (std::isinf(sn_ratio_db)) return 1.0;
  return 1.0 - std::pow(10.0, -sn_ratio_db / 10.0);
}

QuadratureSampler::QuadratureSampler(const DensityMatrix& state) {
  const auto populations = state.populations();
  const auto n = static_cast<std::size_t>(std::lround((kGridMax - kGridMin) / kGridStep)) + 1;
  grid_.resize(n);
  cdf_.resize(n);
  std::vector<double> pdf(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid_[i] = kGridMin + static_cast<double>(i) * kGridStep;
    pdf[i] = std::max(0.0, phase_averaged_pdf(populations, grid_[i]));
  }
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * kGridStep * (pdf[i - 1] + pdf[i]);
  const double total = cdf_.back();
  if (!(total > 0.0)) throw DomainError("state has no probability mass on the sampling grid");
  for (auto& c : cdf_) c /= total;
}

double QuadratureSampler::invert(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return grid_.front();
  if (it == cdf_.end()) return grid_.back();
  const auto j = static_cast<std::size_t>(it - cdf_.begin());
  const double c0 = cdf_[j - 1];
  const double c1 = cdf_[j];
  const double f = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
  return grid_[j - 1] + f * (grid_[j] - grid_[j - 1]);
}

double QuadratureSampler::operator()(Engine& engine) const {
  return invert(std::uniform_real_distribution<double>(0.0, 1.0)(engine));
}

std::vector<double> sample_quadratures(const DensityMatrix& state, std::size_t n, std::uint64_t seed, Stream stream) {
  if (n == 0) throw DomainError("sample count must be at least 1");
  const QuadratureSampler sampler(state);
  std::vector<double> xs(n);
  for (std::size_t start = 0, shard = 0; start < n; start += kShardSize, ++shard) {
    auto engine = make_engine(seed, stream, shard);
    const std::size_t stop = std::min(n, start + kShardSize);
    for (std::size_t i = start; i < stop; ++i) xs[i] = sampler(engine);
  }
  return xs;
}

std::vector<double> sample_vacuum(std::size_t n, std::uint64_t seed, Stream stream) {
  std::vector<double> xs(n);
  for (std::size_t start = 0, shard = 0; start < n; start += kShardSize, ++shard) {
    auto engine = make_engine(seed, stream, shard);
    std::normal_distribution<double> vacuum(0.0, std::sqrt(kVacuumVariance));
    const std::size_t stop = std::min(n, start + kShardSize);
    for (std::size_t i = start; i < stop; ++i) xs[i] = vacuum(engine);
  }
  return xs;
}

FrameRenderer::FrameRenderer(const AcquisitionSpec& spec)
    : spec_(spec),
      signal_shape_(pulse_template(spec, spec.signal_pulse_center)),
      dark_shape_(pulse_template(spec, spec.dark_pulse_center)) {}

FrameRecord FrameRenderer::operator()(std::uint64_t index, const PulseDrive& drive, Engine& noise,
                                      std::size_t* clipped) const {
  FrameRecord frame;
  frame.index = index;
  frame.samples.resize(spec_.samples_per_frame);
  const double mid = spec_.mid_code();
  const double top = spec_.max_code();
  std::normal_distribution<double> electronic(0.0, 1.0);
  std::size_t rails = 0;
  for (int k = 0; k < spec_.samples_per_frame; ++k) {
    double v = mid + drive.signal_area * signal_shape_[k] + drive.dark_area * dark_shape_[k];
    if (drive.noise_sigma > 0.0) v += drive.noise_sigma * electronic(noise);
    double code = std::nearbyint(v);
    if (code < 0.0 || code > top) {
      code = std::clamp(code, 0.0, top);
      ++rails;
    }
    frame.samples[k] = static_cast<std::uint16_t>(code);
  }
  if (clipped) *clipped += rails;
  return frame;
}

SynthesisResult synthesize_frames(std::span<const double> xs, std::span<const double> dark_xs,
                                  const AcquisitionSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (dark_xs.size() != xs.size()) throw DomainError("signal and dark quadrature lists differ in length");
  const double sigma = spec.electronic_noise_sigma();

  const FrameRenderer render(spec);
  SynthesisResult out;
  out.frames.resize(xs.size());
  for (std::size_t start = 0, shard = 0; start < xs.size(); start += kShardSize, ++shard) {
    auto noise = make_engine(seed, Stream::Noise, shard);
    const std::size_t stop = std::min(xs.size(), start + kShardSize);
    for (std::size_t i = start; i < stop; ++i) {
      const PulseDrive drive{spec.area_gain * xs[i], spec.area_gain * dark_xs[i], sigma};
      out.frames[i] = render(i, drive, noise, &out.clipped_samples);
    }
  }
  out.total_samples = xs.size() * static_cast<std::size_t>(spec.samples_per_frame);
  out.clipping_warning =
      out.total_samples > 0 &&
      static_cast<double>(out.clipped_samples) > kClipWarningFraction * static_cast<double>(out.total_samples);
  return out;
}

SynthesisResult synthesize_frames(std::span<const double> xs, const AcquisitionSpec& spec, std::uint64_t seed) {
  const auto dark = sample_vacuum(xs.size(), seed, Stream::DarkPulse);
  return synthesize_frames(xs, dark, spec, seed);
}

}  // namespace focktomo
