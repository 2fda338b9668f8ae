#pragma once

// Run configuration: a flat key=value file, '#' starts a comment.
//
//   state = fock:1            # or diag:0.4,0.6
//   eta = 0.574
//   samples = 200000
//   seed = 42
//
// Keys prefixed with "meta." are carried through untouched (setup
// description that does not affect the simulation).

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "focktomo/frame_synth.hpp"
#include "focktomo/prep_budget.hpp"
#include "focktomo/state_model.hpp"

namespace focktomo {

struct StateSpec {
  /// Fock order when populations is empty.
  int fock = 1;
  std::vector<double> populations;

  DensityMatrix build() const;
  std::string to_string() const;
};

struct RunConfig {
  StateSpec state;
  double eta = 0.574;
  std::uint64_t samples = 200000;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "run";

  AcquisitionSpec acquisition;
  double dark_count_fraction = 0.01;

  EfficiencyBudget budget;
  FilterSpec filters;
  /// P_t as quoted for the etalon pair; budget.p_t holds the value computed from the widths.
  double p_t_quoted = 0.98;

  double bin_width = 0.05;
  int max_n = 10;
  std::vector<double> sweep_powers_mw{1, 2, 3, 5, 7, 9};
  std::uint64_t sweep_frames = 20000;
  int mle_max_iters = 2000;
  double mle_tol = 1e-6;
  double section_max = 2.5;

  std::map<std::string, std::string> metadata{
      {"meta.laser_wavelength_nm", "786"},  {"meta.pump_wavelength_nm", "393"},
      {"meta.rep_rate_mhz", "82"},          {"meta.pump_power_mw", "100"},
      {"meta.pump_waist_um", "220"},        {"meta.crystal", "BBO type I 3 mm"},
      {"meta.trigger_rate_hz", "500"},      {"meta.dark_count_rate_hz", "10"},
  };

  /// State-level transmission such that
  /// eta_state * (1 - dark_count_fraction) * acquisition.electronic_efficiency() = eta.
  double state_efficiency() const;
};

/// Defaults plus the spectral purity implied by the default filter widths.
RunConfig default_config();

/// Apply key=value lines on top of `base`. `source` names the text in
/// diagnostics ("file.cfg:12: ...").
RunConfig parse_config(std::string_view text, const std::string& source, RunConfig base = default_config());

RunConfig load_config(const std::filesystem::path& path, RunConfig base = default_config());

/// Set one key. `location` is used in the ConfigError on failure.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& location);

/// Checks cross-field invariants, including the presence of a seed.
void validate(const RunConfig& cfg);

/// Resolved configuration as key=value text (sorted, reparseable).
std::string render_config(const RunConfig& cfg);

}  // namespace focktomo
