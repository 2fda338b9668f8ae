#include "focktomo/pulse_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "focktomo/errors.hpp"

namespace focktomo {

namespace {

struct Windows {
  int signal_lo, signal_hi, dark_lo, dark_hi;  // inclusive

  bool inside(int k) const { return (k >= signal_lo && k <= signal_hi) || (k >= dark_lo && k <= dark_hi); }
};

Windows integration_windows(const AcquisitionSpec& spec) {
  spec.validate();
  const int half = spec.window_half_width();
  return {spec.signal_pulse_center - half, spec.signal_pulse_center + half, spec.dark_pulse_center - half,
          spec.dark_pulse_center + half};
}

void check_frame(const FrameRecord& frame, const AcquisitionSpec& spec) {
  if (frame.samples.size() != static_cast<std::size_t>(spec.samples_per_frame)) {
    throw SpecError("frame " + std::to_string(frame.index) + " length " + std::to_string(frame.samples.size()) +
                    " does not match samples_per_frame " + std::to_string(spec.samples_per_frame));
  }
}

double baseline_of(const FrameRecord& frame, const Windows& w) {
  double sum = 0.0;
  int n = 0;
  for (int k = 0; k < static_cast<int>(frame.samples.size()); ++k) {
    if (!w.inside(k)) {
      sum += frame.samples[k];
      ++n;
    }
  }
  if (n == 0) throw SpecError("no samples outside the integration windows for a baseline");
  return sum / n;
}

PulseAreas areas_of(const FrameRecord& frame, const Windows& w, double baseline) {
  PulseAreas a;
  a.baseline = baseline;
  for (int k = w.signal_lo; k <= w.signal_hi; ++k) a.signal_area += frame.samples[k] - baseline;
  for (int k = w.dark_lo; k <= w.dark_hi; ++k) a.dark_area += frame.samples[k] - baseline;
  return a;
}

}  // namespace

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double frame_baseline(const FrameRecord& frame, const AcquisitionSpec& spec) {
  check_frame(frame, spec);
  return baseline_of(frame, integration_windows(spec));
}

PulseAreas extract_areas(const FrameRecord& frame, const AcquisitionSpec& spec) {
  check_frame(frame, spec);
  const auto w = integration_windows(spec);
  return areas_of(frame, w, baseline_of(frame, w));
}

PulseAreas extract_areas(const FrameRecord& frame, const AcquisitionSpec& spec, double baseline) {
  check_frame(frame, spec);
  return areas_of(frame, integration_windows(spec), baseline);
}

std::vector<PulseAreas> extract_sequence(std::span<const FrameRecord> frames, const AcquisitionSpec& spec) {
  const auto w = integration_windows(spec);
  std::vector<double> baselines(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    check_frame(frames[i], spec);
    baselines[i] = baseline_of(frames[i], w);
  }
  // Every frame contributes the same number of out-of-window samples, so the
  // mean of per-frame baselines is the pooled mean.
  const double pooled = sample_mean(baselines);
  std::vector<PulseAreas> out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out[i] = areas_of(frames[i], w, pooled);
    out[i].baseline = baselines[i];
  }
  return out;
}

Calibration calibrate_quadratures(std::span<const double> signal_areas, std::span<const double> dark_areas) {
  if (dark_areas.size() < kMinCalibrationSamples) {
    throw CalibrationError("need at least " + std::to_string(kMinCalibrationSamples) + " dark areas, got " +
                           std::to_string(dark_areas.size()));
  }
  const double mean = sample_mean(dark_areas);
  const double var = sample_variance(dark_areas);
  if (!(var > 0.0) || !std::isfinite(var)) throw CalibrationError("dark-area variance is not positive");

  Calibration c;
  c.dark_mean = mean;
  c.scale = std::sqrt(var / kVacuumVariance);
  c.signal.reserve(signal_areas.size());
  c.dark.reserve(dark_areas.size());
  for (double a : signal_areas) c.signal.push_back((a - mean) / c.scale);
  for (double a : dark_areas) c.dark.push_back((a - mean) / c.scale);
  return c;
}

double Histogram::density(std::size_t i) const {
  if (total == 0) return 0.0;
  return static_cast<double>(counts.at(i)) / (static_cast<double>(total) * bin_width);
}

Histogram build_histogram(std::span<const double> xs, double bin_width, double origin) {
  if (!(bin_width > 0.0)) throw DomainError("bin width must be positive");
  if (xs.empty()) throw HistogramError("cannot histogram an empty sample");
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  if (!std::isfinite(*lo_it) || !std::isfinite(*hi_it)) throw HistogramError("non-finite sample");
  auto bin_of = [&](double x) { return static_cast<long long>(std::llround((x - origin) / bin_width)); };
  const long long first = bin_of(*lo_it);
  const long long last = bin_of(*hi_it);

  Histogram h;
  h.bin_width = bin_width;
  h.center_offset = origin + static_cast<double>(first) * bin_width;
  h.counts.assign(static_cast<std::size_t>(last - first + 1), 0);
  for (double x : xs) ++h.counts[static_cast<std::size_t>(bin_of(x) - first)];
  h.total = xs.size();
  return h;
}

void write_histogram_csv(const Histogram& hist, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "bin_center,count,density\n";
  char line[128];
  for (std::size_t i = 0; i < hist.size(); ++i) {
    std::snprintf(line, sizeof line, "%.10g,%llu,%.17g\n", hist.center(i),
                  static_cast<unsigned long long>(hist.counts[i]), hist.density(i));
    os << line;
  }
  if (!os) throw IoError("write failed for " + path.string());
}

Histogram read_histogram_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  std::getline(is, line);
  if (line != "bin_center,count,density") throw IoError(path.string() + ": unexpected histogram header");
  std::vector<double> centers, densities;
  Histogram h;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double c = 0.0, d = 0.0;
    unsigned long long n = 0;
    if (std::sscanf(line.c_str(), "%lf,%llu,%lf", &c, &n, &d) != 3) {
      throw IoError(path.string() + ": malformed row '" + line + "'");
    }
    centers.push_back(c);
    densities.push_back(d);
    h.counts.push_back(n);
    h.total += n;
  }
  if (h.counts.empty()) throw HistogramError(path.string() + ": no bins");
  h.center_offset = centers.front();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] > 0) {
      h.bin_width = static_cast<double>(h.counts[i]) / (static_cast<double>(h.total) * densities[i]);
      break;
    }
  }
  return h;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("line fit needs two or more paired points");
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("line fit needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

double ShotNoiseSweep::sn_db() const { return 10.0 * std::log10(reference_variance / electronic_variance); }

namespace {

double dark_variance_at(double power_mw, const AcquisitionSpec& spec, double noise_sigma, std::uint64_t seed,
                        std::uint64_t point, std::size_t frames) {
  const FrameRenderer render(spec);
  const double gain = spec.area_gain * std::sqrt(power_mw / spec.lo_power_mw);
  std::vector<FrameRecord> batch(frames);
  for (std::size_t start = 0, shard = 0; start < frames; start += kShardSize, ++shard) {
    auto engine = make_engine(seed, Stream::ShotNoiseSweep, (point << 32) | shard);
    std::normal_distribution<double> vacuum(0.0, std::sqrt(kVacuumVariance));
    const std::size_t stop = std::min(frames, start + kShardSize);
    for (std::size_t i = start; i < stop; ++i) {
      PulseDrive drive{0.0, 0.0, noise_sigma};
      if (gain > 0.0) {
        drive.signal_area = gain * vacuum(engine);
        drive.dark_area = gain * vacuum(engine);
      }
      batch[i] = render(i, drive, engine);
    }
  }
  const auto areas = extract_sequence(batch, spec);
  std::vector<double> dark(areas.size());
  for (std::size_t i = 0; i < areas.size(); ++i) dark[i] = areas[i].dark_area;
  return sample_variance(dark);
}

}  // namespace

ShotNoiseSweep shot_noise_sweep(std::span<const double> powers_mw, const AcquisitionSpec& spec, std::uint64_t seed,
                                std::size_t frames_per_point) {
  spec.validate();
  if (powers_mw.size() < 3) throw DomainError("shot-noise sweep needs at least 3 LO powers");
  for (double p : powers_mw) {
    if (!(p > 0.0)) throw DomainError("LO powers must be positive");
  }
  if (frames_per_point < 2) throw DomainError("shot-noise sweep needs at least 2 frames per point");
  const double sigma = spec.electronic_noise_sigma();

  ShotNoiseSweep out;
  std::vector<double> x, y;
  std::uint64_t point = 0;
  for (double p : powers_mw) {
    const double v = dark_variance_at(p, spec, sigma, seed, point++, frames_per_point);
    out.points.push_back({p, v});
    x.push_back(p);
    y.push_back(v);
  }
  out.electronic_variance = dark_variance_at(0.0, spec, sigma, seed, point++, frames_per_point);
  const auto at_reference = std::find_if(out.points.begin(), out.points.end(),
                                         [&](const SweepPoint& s) { return s.power_mw == spec.lo_power_mw; });
  out.reference_variance = at_reference != out.points.end()
                               ? at_reference->dark_variance
                               : dark_variance_at(spec.lo_power_mw, spec, sigma, seed, point++, frames_per_point);
  out.fit = fit_line(x, y);
  return out;
}

}  // namespace focktomo
