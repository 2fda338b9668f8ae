#include "focktomo/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "focktomo/errors.hpp"
#include "focktomo/hfv1.hpp"

namespace focktomo {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("missing artifact " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

/// Merge `patch` into the run report, creating it when absent.
void update_run_report(const fs::path& dir, const nlohmann::json& patch) {
  const auto path = dir / artifacts::kRunReport;
  nlohmann::json report = fs::exists(path) ? read_json(path) : nlohmann::json::object();
  report.merge_patch(patch);
  write_json(path, report);
}

void require(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing artifact " + path.string());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void prepare_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());
  write_text(cfg.out_dir / artifacts::kConfig, render_config(cfg));
}

void write_quadratures(const fs::path& path, std::span<const double> signal, std::span<const double> dark) {
  std::string text = "signal,dark\n";
  text.reserve(signal.size() * 48);
  for (std::size_t i = 0; i < signal.size(); ++i) text += fmt(signal[i]) + "," + fmt(dark[i]) + "\n";
  write_text(path, text);
}

void read_quadratures(const fs::path& path, std::vector<double>& signal, std::vector<double>& dark) {
  std::ifstream is(path);
  if (!is) throw IoError("missing artifact " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != "signal,dark") throw IoError(path.string() + ": unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    char* end = nullptr;
    const double s = std::strtod(line.c_str(), &end);
    if (*end != ',') throw IoError(path.string() + ": malformed row '" + line + "'");
    const double d = std::strtod(end + 1, &end);
    signal.push_back(s);
    dark.push_back(d);
  }
}

}  // namespace

Stage parse_stage(const std::string& name) {
  static const std::map<std::string, Stage> stages{{"simulate", Stage::Simulate},
                                                   {"ingest", Stage::Ingest},
                                                   {"reconstruct", Stage::Reconstruct},
                                                   {"all", Stage::All},
                                                   {"report", Stage::Report}};
  const auto it = stages.find(name);
  if (it == stages.end()) throw ConfigError("stage", "unknown stage '" + name + "'");
  return it->second;
}

std::vector<double> simulate_signal_quadratures(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.seed.value();
  const auto lossy = apply_loss(cfg.state.build(), cfg.state_efficiency());
  auto xs = sample_quadratures(lossy, cfg.samples, seed, Stream::Sampling);

  // False triggers: the heralded pulse sees only the vacuum.
  if (cfg.dark_count_fraction > 0.0) {
    for (std::size_t start = 0, shard = 0; start < xs.size(); start += kShardSize, ++shard) {
      auto engine = make_engine(seed, Stream::DarkCounts, shard);
      std::bernoulli_distribution false_trigger(cfg.dark_count_fraction);
      std::normal_distribution<double> vacuum(0.0, std::sqrt(kVacuumVariance));
      const std::size_t stop = std::min(xs.size(), start + kShardSize);
      for (std::size_t i = start; i < stop; ++i) {
        const bool replace = false_trigger(engine);
        const double v = vacuum(engine);
        if (replace) xs[i] = v;
      }
    }
  }
  return xs;
}

void run_simulate(const RunConfig& cfg) {
  prepare_dir(cfg);
  const auto xs = simulate_signal_quadratures(cfg);
  const auto synth = synthesize_frames(xs, cfg.acquisition, cfg.seed.value());
  write_frames(synth.frames, cfg.acquisition, cfg.out_dir / artifacts::kFrames);

  nlohmann::json patch;
  patch["simulate"] = {
      {"frames", synth.frames.size()},
      {"state", cfg.state.to_string()},
      {"eta", cfg.eta},
      {"eta_state", cfg.state_efficiency()},
      {"dark_count_fraction", cfg.dark_count_fraction},
      {"seed", cfg.seed.value()},
      {"clipped_samples", synth.clipped_samples},
      {"clipping_fraction",
       synth.total_samples ? static_cast<double>(synth.clipped_samples) / static_cast<double>(synth.total_samples)
                           : 0.0},
      {"clipping_warning", synth.clipping_warning},
      {"electronic_noise_sigma", cfg.acquisition.electronic_noise_sigma()},
  };
  update_run_report(cfg.out_dir, patch);
}

void run_ingest(const RunConfig& cfg) {
  prepare_dir(cfg);
  const auto file = read_frames(cfg.out_dir / artifacts::kFrames, cfg.acquisition);
  const auto areas = extract_sequence(file.frames, file.spec);
  std::vector<double> signal(areas.size()), dark(areas.size());
  for (std::size_t i = 0; i < areas.size(); ++i) {
    signal[i] = areas[i].signal_area;
    dark[i] = areas[i].dark_area;
  }
  const auto cal = calibrate_quadratures(signal, dark);
  write_quadratures(cfg.out_dir / artifacts::kQuadratures, cal.signal, cal.dark);
  write_histogram_csv(build_histogram(cal.dark, cfg.bin_width), cfg.out_dir / artifacts::kVacuumHist);
  write_histogram_csv(build_histogram(cal.signal, cfg.bin_width), cfg.out_dir / artifacts::kSignalHist);

  const auto sweep = shot_noise_sweep(cfg.sweep_powers_mw, file.spec, cfg.seed.value(), cfg.sweep_frames);
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : sweep.points) points.push_back({{"power_mw", p.power_mw}, {"dark_variance", p.dark_variance}});

  const double kappa_ratio = spatial_width_ratio(cfg.budget.p_s);
  EfficiencyBudget quoted = cfg.budget;
  quoted.p_t = cfg.p_t_quoted;

  nlohmann::json patch;
  patch["calibration"] = {{"scale", cal.scale},
                          {"dark_mean", cal.dark_mean},
                          {"frames", areas.size()},
                          {"expected_scale", file.spec.area_gain}};
  patch["shotnoise"] = {{"r2", sweep.fit.r2},
                        {"sn_db", sweep.sn_db()},
                        {"slope", sweep.fit.slope},
                        {"intercept", sweep.fit.intercept},
                        {"electronic_variance", sweep.electronic_variance},
                        {"reference_power_mw", file.spec.lo_power_mw},
                        {"points", points}};
  patch["budget"] = {{"eta_hd", cfg.budget.eta_hd},
                     {"eta_dc", cfg.budget.eta_dc},
                     {"eta_exp", cfg.budget.eta_exp},
                     {"p_s", cfg.budget.p_s},
                     {"p_t", cfg.budget.p_t},
                     {"p_t_quoted", cfg.p_t_quoted},
                     {"kappa_ratio", kappa_ratio},
                     {"eta_mm", mode_matching_efficiency(cfg.budget)},
                     {"total_efficiency", total_efficiency(cfg.budget)},
                     {"total_efficiency_quoted_pt", total_efficiency(quoted)}};
  update_run_report(cfg.out_dir, patch);
}

ReconstructionOutcome reconstruct_quadratures(std::span<const double> signal, std::span<const double> dark,
                                              const RunConfig& cfg) {
  ReconstructionOutcome r;
  r.signal_hist = build_histogram(signal, cfg.bin_width);
  r.vacuum_hist = build_histogram(dark, cfg.bin_width);
  r.eta_fit = fit_efficiency(r.signal_hist);
  r.vacuum_fit = fit_efficiency(r.vacuum_hist);
  r.rho_diag = dm_diagonal(signal, cfg.max_n);

  const auto rho = DensityMatrix::diagonal(r.rho_diag.value);
  const double closed_eta = std::clamp(r.eta_fit.eta, 0.0, 1.0);
  r.abel_section = truncate_section(abel_invert(r.signal_hist), cfg.section_max);
  r.dm_section = wigner_from_dm(rho, r.abel_section.x);
  r.closed_section = lossy_single_photon_section(closed_eta, r.abel_section.x);
  r.w0_dm = wigner_value(rho, 0.0, 0.0);
  r.w0_abel = r.abel_section.w.front();
  r.w0_closed = r.closed_section.w.front();
  r.rms = compare_sections(r.abel_section, r.dm_section, r.closed_section);
  r.mle = mle_reconstruct(signal, cfg.max_n, cfg.mle_max_iters, cfg.mle_tol);
  return r;
}

nlohmann::json reconstruction_report(const ReconstructionOutcome& r) {
  nlohmann::json rho_diag = nlohmann::json::array();
  for (std::size_t n = 0; n < r.rho_diag.value.size(); ++n) {
    rho_diag.push_back({{"n", n}, {"value", r.rho_diag.value[n]}, {"stderr", r.rho_diag.stderr_value[n]}});
  }
  nlohmann::json mle_diag = nlohmann::json::array();
  for (double p : r.mle.rho.populations()) mle_diag.push_back(p);

  nlohmann::json j;
  j["eta_fit"] = {{"value", r.eta_fit.eta},
                  {"stderr", r.eta_fit.stderr_eta},
                  {"chi2", r.eta_fit.chi2},
                  {"dof", r.eta_fit.dof}};
  j["eta_fit_vacuum"] = {{"value", r.vacuum_fit.eta}, {"stderr", r.vacuum_fit.stderr_eta}};
  j["rho_diag"] = rho_diag;
  j["wigner_origin"] = {{"dm_route", r.w0_dm}, {"abel_route", r.w0_abel}, {"closed_form", r.w0_closed}};
  j["rms"] = {{"abel", r.rms.a}, {"dm", r.rms.b}};
  j["mle"] = {{"rho_diag", mle_diag},
              {"iterations", r.mle.iterations},
              {"converged", r.mle.converged},
              {"log_likelihood", r.mle.log_likelihood.back()}};
  j["samples"] = r.signal_hist.total;
  return j;
}

void write_section_csv(const WignerSection& s, const fs::path& path) {
  std::string text = "x,w\n";
  for (std::size_t i = 0; i < s.x.size(); ++i) text += fmt(s.x[i]) + "," + fmt(s.w[i]) + "\n";
  write_text(path, text);
}

WignerSection read_section_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("missing artifact " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != "x,w") throw IoError(path.string() + ": unexpected header");
  WignerSection s;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double x = 0.0, w = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf", &x, &w) != 2) throw IoError(path.string() + ": malformed row");
    s.x.push_back(x);
    s.w.push_back(w);
  }
  return s;
}

void run_reconstruct(const RunConfig& cfg) {
  prepare_dir(cfg);
  std::vector<double> signal, dark;
  read_quadratures(cfg.out_dir / artifacts::kQuadratures, signal, dark);
  const auto r = reconstruct_quadratures(signal, dark, cfg);
  write_json(cfg.out_dir / artifacts::kReconstruction, reconstruction_report(r));
  write_section_csv(r.dm_section, cfg.out_dir / artifacts::kWignerDm);
  write_section_csv(r.abel_section, cfg.out_dir / artifacts::kWignerAbel);
  write_section_csv(r.closed_section, cfg.out_dir / artifacts::kWignerClosed);
  write_json(cfg.out_dir / artifacts::kRhoMle, to_json(r.mle.rho));
}

void report_figures(const fs::path& run_dir) {
  for (const char* name : {artifacts::kReconstruction, artifacts::kVacuumHist, artifacts::kSignalHist,
                           artifacts::kWignerAbel, artifacts::kWignerDm, artifacts::kWignerClosed}) {
    require(run_dir / name);
  }
  const auto recon = read_json(run_dir / artifacts::kReconstruction);
  const double eta_signal = recon.at("eta_fit").at("value").get<double>();
  const double eta_vacuum = recon.at("eta_fit_vacuum").at("value").get<double>();
  const auto vac = read_histogram_csv(run_dir / artifacts::kVacuumHist);
  const auto sig = read_histogram_csv(run_dir / artifacts::kSignalHist);

  // Fig. 2: both histograms on the union of their bin centers.
  const double w = sig.bin_width;
  std::map<long long, std::pair<double, double>> rows;  // bin index -> (vacuum, signal)
  for (std::size_t i = 0; i < vac.size(); ++i) rows[std::llround(vac.center(i) / w)].first = vac.density(i);
  for (std::size_t i = 0; i < sig.size(); ++i) rows[std::llround(sig.center(i) / w)].second = sig.density(i);
  // Curves stay on the physical branch even if a fit lands marginally outside [0, 1].
  const double eta_v = std::clamp(eta_vacuum, 0.0, 1.0);
  const double eta_s = std::clamp(eta_signal, 0.0, 1.0);
  std::string fig2 = "x,vacuum_density,signal_density,vacuum_fit,signal_fit\n";
  for (const auto& [k, dens] : rows) {
    const double x = static_cast<double>(k) * w;
    fig2 += fmt(x) + "," + fmt(dens.first) + "," + fmt(dens.second) + "," + fmt(lossy_marginal(x, eta_v)) + "," +
            fmt(lossy_marginal(x, eta_s)) + "\n";
  }
  write_text(run_dir / artifacts::kFig2, fig2);

  std::string fig3 = "n,value,stderr\n";
  for (const auto& e : recon.at("rho_diag")) {
    fig3 += std::to_string(e.at("n").get<int>()) + "," + fmt(e.at("value").get<double>()) + "," +
            fmt(e.at("stderr").get<double>()) + "\n";
  }
  write_text(run_dir / artifacts::kFig3, fig3);

  const auto abel = read_section_csv(run_dir / artifacts::kWignerAbel);
  const auto dm = read_section_csv(run_dir / artifacts::kWignerDm);
  const auto closed = read_section_csv(run_dir / artifacts::kWignerClosed);
  if (abel.x.size() != dm.x.size() || abel.x.size() != closed.x.size()) {
    throw ComparisonError("Wigner section files have different grids");
  }
  std::string fig4 = "x,abel,dm,closed_form\n";
  for (std::size_t i = 0; i < abel.x.size(); ++i) {
    fig4 += fmt(abel.x[i]) + "," + fmt(abel.w[i]) + "," + fmt(dm.w[i]) + "," + fmt(closed.w[i]) + "\n";
  }
  write_text(run_dir / artifacts::kFig4, fig4);
}

void run_pipeline(const RunConfig& cfg, Stage stage) {
  if (stage == Stage::Report) {
    report_figures(cfg.out_dir);
    return;
  }
  validate(cfg);
  switch (stage) {
    case Stage::Simulate:
      run_simulate(cfg);
      break;
    case Stage::Ingest:
      run_ingest(cfg);
      break;
    case Stage::Reconstruct:
      run_reconstruct(cfg);
      break;
    case Stage::All:
      run_simulate(cfg);
      run_ingest(cfg);
      run_reconstruct(cfg);
      break;
    case Stage::Report:
      break;
  }
}

}  // namespace focktomo
