#pragma once

// Pulse-area extraction, vacuum calibration, histogramming and shot-noise
// linearity checks.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "focktomo/frame_synth.hpp"

namespace focktomo {

struct PulseAreas {
  double signal_area = 0.0;
  double dark_area = 0.0;
  double baseline = 0.0;
};

/// Mean of the samples outside both integration windows.
double frame_baseline(const FrameRecord& frame, const AcquisitionSpec& spec);

/// Areas against the frame's own baseline.
PulseAreas extract_areas(const FrameRecord& frame, const AcquisitionSpec& spec);

/// Areas against a caller-supplied baseline; `baseline` is reported back unchanged.
PulseAreas extract_areas(const FrameRecord& frame, const AcquisitionSpec& spec, double baseline);

/// Areas for a whole sequence against the pooled out-of-window mean of all
/// frames in it. The per-frame baseline estimate is still reported in each
/// PulseAreas.
std::vector<PulseAreas> extract_sequence(std::span<const FrameRecord> frames, const AcquisitionSpec& spec);

struct Calibration {
  std::vector<double> signal;
  std::vector<double> dark;
  double scale = 1.0;      ///< area units per quadrature unit
  double dark_mean = 0.0;  ///< area units
};

inline constexpr std::size_t kMinCalibrationSamples = 1000;

/// Shift by the dark mean and divide by the scale that maps the dark
/// variance to 1/4.
Calibration calibrate_quadratures(std::span<const double> signal_areas, std::span<const double> dark_areas);

struct Histogram {
  double bin_width = 0.05;
  double center_offset = 0.0;  ///< center of the first bin
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t size() const noexcept { return counts.size(); }
  double center(std::size_t i) const { return center_offset + static_cast<double>(i) * bin_width; }
  /// counts[i] / (total * bin_width)
  double density(std::size_t i) const;
};

inline constexpr double kDefaultBinWidth = 0.05;

/// Uniform bins centered on origin + k * bin_width, spanning [min, max] of xs.
Histogram build_histogram(std::span<const double> xs, double bin_width = kDefaultBinWidth, double origin = 0.0);

/// Header "bin_center,count,density".
void write_histogram_csv(const Histogram& hist, const std::filesystem::path& path);
Histogram read_histogram_csv(const std::filesystem::path& path);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct SweepPoint {
  double power_mw = 0.0;
  double dark_variance = 0.0;  ///< area units squared
};

struct ShotNoiseSweep {
  std::vector<SweepPoint> points;
  double electronic_variance = 0.0;  ///< measured with the LO blocked
  double reference_variance = 0.0;   ///< measured at spec.lo_power_mw
  LineFit fit;

  /// 10 log10(reference_variance / electronic_variance).
  double sn_db() const;
};

inline constexpr std::size_t kDefaultSweepFrames = 20000;

/// Dark-area variance versus LO power. Shot-noise area variance scales
/// linearly with power (area_gain is defined at spec.lo_power_mw); the
/// electronic noise is held at the level spec implies at lo_power_mw.
ShotNoiseSweep shot_noise_sweep(std::span<const double> powers_mw, const AcquisitionSpec& spec, std::uint64_t seed,
                                std::size_t frames_per_point = kDefaultSweepFrames);

double sample_mean(std::span<const double> xs);
/// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> xs);

}  // namespace focktomo
