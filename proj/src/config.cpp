#include "focktomo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "focktomo/errors.hpp"

namespace focktomo {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& v, const std::string& key, const std::string& loc) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v == "inf" || v == "+inf") return INFINITY;
  if (ec != std::errc{} || ptr != end) throw ConfigError(loc, "key '" + key + "': '" + v + "' is not a number");
  return out;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key, const std::string& loc) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(loc, "key '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return out;
}

int parse_int(const std::string& v, const std::string& key, const std::string& loc) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError(loc, "key '" + key + "': '" + v + "' is not an integer");
  return out;
}

std::vector<double> parse_list(const std::string& v, const std::string& key, const std::string& loc) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), key, loc));
  if (out.empty()) throw ConfigError(loc, "key '" + key + "': empty list");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

StateSpec parse_state(const std::string& v, const std::string& loc) {
  StateSpec s;
  if (v.rfind("fock:", 0) == 0) {
    s.fock = parse_int(v.substr(5), "state", loc);
    if (s.fock < 0 || s.fock > kMaxFockOrder) throw ConfigError(loc, "key 'state': Fock order out of range");
  } else if (v.rfind("diag:", 0) == 0) {
    s.populations = parse_list(v.substr(5), "state", loc);
  } else {
    throw ConfigError(loc, "key 'state': expected 'fock:N' or 'diag:p0,p1,...', got '" + v + "'");
  }
  return s;
}

struct Setting {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define FT_DOUBLE(field)                                                                                    \
  Setting {                                                                                                 \
    [](RunConfig& c, const std::string& v, const std::string& l) { c.field = parse_double(v, #field, l); }, \
        [](const RunConfig& c) { return fmt(c.field); }                                                     \
  }
#define FT_INT(field)                                                                                    \
  Setting {                                                                                              \
    [](RunConfig& c, const std::string& v, const std::string& l) { c.field = parse_int(v, #field, l); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                                       \
  }
#define FT_U64(field)                                                                                    \
  Setting {                                                                                              \
    [](RunConfig& c, const std::string& v, const std::string& l) { c.field = parse_u64(v, #field, l); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                                       \
  }

const std::map<std::string, Setting>& settings() {
  static const std::map<std::string, Setting> table{
      {"state", {[](RunConfig& c, const std::string& v, const std::string& l) { c.state = parse_state(v, l); },
                 [](const RunConfig& c) { return c.state.to_string(); }}},
      {"eta", FT_DOUBLE(eta)},
      {"samples", FT_U64(samples)},
      {"seed", {[](RunConfig& c, const std::string& v, const std::string& l) { c.seed = parse_u64(v, "seed", l); },
                [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); }}},
      {"out", {[](RunConfig& c, const std::string& v, const std::string&) { c.out_dir = v; },
               [](const RunConfig& c) { return c.out_dir.string(); }}},
      {"samples_per_frame", FT_INT(acquisition.samples_per_frame)},
      {"sample_period", FT_DOUBLE(acquisition.sample_period)},
      {"adc_bits", FT_INT(acquisition.adc_bits)},
      {"rep_period", FT_DOUBLE(acquisition.rep_period)},
      {"pulse_fwhm", FT_DOUBLE(acquisition.pulse_fwhm)},
      {"signal_pulse_center", FT_INT(acquisition.signal_pulse_center)},
      {"dark_pulse_center", FT_INT(acquisition.dark_pulse_center)},
      {"lo_power_mw", FT_DOUBLE(acquisition.lo_power_mw)},
      {"sn_ratio_db", FT_DOUBLE(acquisition.sn_ratio_db)},
      {"area_gain", FT_DOUBLE(acquisition.area_gain)},
      {"dark_count_fraction", FT_DOUBLE(dark_count_fraction)},
      {"eta_hd", FT_DOUBLE(budget.eta_hd)},
      {"eta_dc", FT_DOUBLE(budget.eta_dc)},
      {"eta_exp", FT_DOUBLE(budget.eta_exp)},
      {"p_s", FT_DOUBLE(budget.p_s)},
      {"p_t_quoted", FT_DOUBLE(p_t_quoted)},
      {"sigma_f_ghz",
       {[](RunConfig& c, const std::string& v, const std::string& l) {
          c.filters.sigma_f = parse_double(v, "sigma_f_ghz", l);
        },
        [](const RunConfig& c) { return fmt(c.filters.sigma_f); }}},
      {"sigma_p_ghz",
       {[](RunConfig& c, const std::string& v, const std::string& l) {
          c.filters.sigma_p = parse_double(v, "sigma_p_ghz", l);
        },
        [](const RunConfig& c) { return fmt(c.filters.sigma_p); }}},
      {"bin_width", FT_DOUBLE(bin_width)},
      {"max_n", FT_INT(max_n)},
      {"sweep_powers_mw",
       {[](RunConfig& c, const std::string& v, const std::string& l) {
          c.sweep_powers_mw = parse_list(v, "sweep_powers_mw", l);
        },
        [](const RunConfig& c) { return fmt_list(c.sweep_powers_mw); }}},
      {"sweep_frames", FT_U64(sweep_frames)},
      {"mle_max_iters", FT_INT(mle_max_iters)},
      {"mle_tol", FT_DOUBLE(mle_tol)},
      {"section_max", FT_DOUBLE(section_max)},
  };
  return table;
}

#undef FT_DOUBLE
#undef FT_INT
#undef FT_U64

}  // namespace

DensityMatrix StateSpec::build() const {
  if (populations.empty()) return DensityMatrix::fock(fock);
  return DensityMatrix::diagonal(populations);
}

std::string StateSpec::to_string() const {
  if (populations.empty()) return "fock:" + std::to_string(fock);
  return "diag:" + fmt_list(populations);
}

double RunConfig::state_efficiency() const {
  return eta / ((1.0 - dark_count_fraction) * acquisition.electronic_efficiency());
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.budget.p_t = spectral_purity(cfg.filters.sigma_f, cfg.filters.sigma_p);
  return cfg;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& location) {
  if (key.rfind("meta.", 0) == 0) {
    cfg.metadata[key] = value;
    return;
  }
  const auto& table = settings();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(location, "unknown key '" + key + "'");
  it->second.set(cfg, value, location);
  if (key == "sigma_f_ghz" || key == "sigma_p_ghz") {
    if (cfg.filters.sigma_f > 0.0 && cfg.filters.sigma_p > 0.0) {
      cfg.budget.p_t = spectral_purity(cfg.filters.sigma_f, cfg.filters.sigma_p);
    }
  }
}

RunConfig parse_config(std::string_view text, const std::string& source, RunConfig base) {
  std::istringstream is{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string loc = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(loc, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(loc, "empty key");
    apply_setting(base, key, value, loc);
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string(), std::move(base));
}

void validate(const RunConfig& cfg) {
  if (!cfg.seed) throw ConfigError("seed", "no seed given (config key, --seed, or FOCKTOMO_SEED)");
  if (cfg.samples < 1) throw ConfigError("samples", "sample count must be at least 1");
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) throw ConfigError("eta", "efficiency must lie in [0, 1]");
  if (!(cfg.dark_count_fraction >= 0.0 && cfg.dark_count_fraction < 1.0)) {
    throw ConfigError("dark_count_fraction", "must lie in [0, 1)");
  }
  if (cfg.state_efficiency() > 1.0) {
    throw ConfigError("eta", "eta exceeds what dark counts and electronic noise allow (eta_state > 1)");
  }
  if (!cfg.state.populations.empty()) {
    double sum = 0.0;
    for (double p : cfg.state.populations) {
      if (p < 0.0) throw ConfigError("state", "populations must be non-negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("state", "populations must sum to 1");
    if (cfg.state.populations.size() > static_cast<std::size_t>(kMaxFockOrder) + 1) {
      throw ConfigError("state", "too many populations");
    }
  }
  try {
    cfg.acquisition.validate();
  } catch (const SpecError& e) {
    throw ConfigError("acquisition", e.what());
  }
  try {
    cfg.budget.validate();
    spectral_purity(cfg.filters.sigma_f, cfg.filters.sigma_p);
  } catch (const DomainError& e) {
    throw ConfigError("budget", e.what());
  }
  if (!(cfg.p_t_quoted > 0.0 && cfg.p_t_quoted <= 1.0)) throw ConfigError("p_t_quoted", "must lie in (0, 1]");
  if (!(cfg.bin_width > 0.0)) throw ConfigError("bin_width", "must be positive");
  if (cfg.max_n < 1 || cfg.max_n > 10) throw ConfigError("max_n", "must lie in [1, 10]");
  if (cfg.sweep_powers_mw.size() < 3) throw ConfigError("sweep_powers_mw", "need at least 3 powers");
  for (double p : cfg.sweep_powers_mw)
    if (!(p > 0.0)) throw ConfigError("sweep_powers_mw", "powers must be positive");
  if (cfg.sweep_frames < 2) throw ConfigError("sweep_frames", "must be at least 2");
  if (cfg.mle_max_iters < 1) throw ConfigError("mle_max_iters", "must be positive");
  if (!(cfg.mle_tol > 0.0)) throw ConfigError("mle_tol", "must be positive");
  if (!(cfg.section_max > 0.0)) throw ConfigError("section_max", "must be positive");
}

std::string render_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, setting] : settings()) {
    const std::string v = setting.get(cfg);
    if (key == "seed" && v.empty()) continue;
    out += key + " = " + v + "\n";
  }
  for (const auto& [key, value] : cfg.metadata) out += key + " = " + value + "\n";
  return out;
}

}  // namespace focktomo
