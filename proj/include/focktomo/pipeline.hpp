#pragma once

// Simulate -> ingest -> reconstruct -> report, each stage reading the
// previous stage's artifacts from the run directory.
//
// Artifacts (relative to RunConfig::out_dir):
//   config.resolved       resolved configuration
//   frames.hfv            simulate: HFV1 frames
//   run_report.json       simulate/ingest: "simulate", "budget", "calibration", "shotnoise"
//   quadratures.csv       ingest: calibrated "signal,dark" per frame
//   vacuum_hist.csv       ingest
//   signal_hist.csv       ingest
//   reconstruction.json   reconstruct: "eta_fit", "rho_diag", "wigner_origin", "rms", "mle", ...
//   wigner_dm.csv         reconstruct: "x,w"
//   wigner_abel.csv       reconstruct: "x,w"
//   wigner_closed.csv     reconstruct: "x,w"
//   rho_mle.json          reconstruct: DensityMatrix JSON
//   fig2.csv fig3.csv fig4.csv   report

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "focktomo/config.hpp"
#include "focktomo/reconstruct.hpp"

namespace focktomo {

enum class Stage { Simulate, Ingest, Reconstruct, All, Report };

Stage parse_stage(const std::string& name);

namespace artifacts {
inline constexpr const char* kConfig = "config.resolved";
inline constexpr const char* kFrames = "frames.hfv";
inline constexpr const char* kRunReport = "run_report.json";
inline constexpr const char* kQuadratures = "quadratures.csv";
inline constexpr const char* kVacuumHist = "vacuum_hist.csv";
inline constexpr const char* kSignalHist = "signal_hist.csv";
inline constexpr const char* kReconstruction = "reconstruction.json";
inline constexpr const char* kWignerDm = "wigner_dm.csv";
inline constexpr const char* kWignerAbel = "wigner_abel.csv";
inline constexpr const char* kWignerClosed = "wigner_closed.csv";
inline constexpr const char* kRhoMle = "rho_mle.json";
inline constexpr const char* kFig2 = "fig2.csv";
inline constexpr const char* kFig3 = "fig3.csv";
inline constexpr const char* kFig4 = "fig4.csv";
}  // namespace artifacts

/// Signal quadratures with the configured dark-count contamination.
std::vector<double> simulate_signal_quadratures(const RunConfig& cfg);

void run_simulate(const RunConfig& cfg);
void run_ingest(const RunConfig& cfg);
void run_reconstruct(const RunConfig& cfg);
/// Figure data from an existing run directory. Throws IoError naming the
/// first missing artifact.
void report_figures(const std::filesystem::path& run_dir);

/// Validates the config, then runs the stage ("all" chains simulate,
/// ingest and reconstruct).
void run_pipeline(const RunConfig& cfg, Stage stage);

/// Everything reconstruct computes from a pair of calibrated quadrature lists.
struct ReconstructionOutcome {
  Histogram signal_hist;
  Histogram vacuum_hist;
  EfficiencyFit eta_fit;
  EfficiencyFit vacuum_fit;
  DiagonalEstimate rho_diag;
  WignerSection dm_section;
  WignerSection abel_section;
  WignerSection closed_section;
  double w0_dm = 0.0;
  double w0_abel = 0.0;
  double w0_closed = 0.0;
  SectionRms rms;  ///< a = Abel, b = density-matrix route
  MleResult mle;
};

ReconstructionOutcome reconstruct_quadratures(std::span<const double> signal, std::span<const double> dark,
                                              const RunConfig& cfg);

nlohmann::json reconstruction_report(const ReconstructionOutcome& r);

void write_section_csv(const WignerSection& s, const std::filesystem::path& path);
WignerSection read_section_csv(const std::filesystem::path& path);

}  // namespace focktomo
