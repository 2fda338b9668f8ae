// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "focktomo/config.hpp"
#include "focktomo/hfv1.hpp"
#include "focktomo/pipeline.hpp"
#include "focktomo/prep_budget.hpp"
#include "focktomo/reconstruct.hpp"
#include "oracles.hpp"

using namespace focktomo;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<double> read_signal_column(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  std::vector<double> xs;
  while (std::getline(is, line)) xs.push_back(std::stod(line.substr(0, line.find(','))));
  return xs;
}

RunConfig run_config(const fs::path& out) {
  auto cfg = default_config();
  cfg.seed = 42;
  cfg.out_dir = out;
  return cfg;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "focktomo_acceptance";
  fs::remove_all(root);
  const auto cfg = run_config(root / "run");
  run_pipeline(cfg, Stage::All);
  const auto recon = json::parse(slurp(cfg.out_dir / artifacts::kReconstruction));
  const auto run_report = json::parse(slurp(cfg.out_dir / artifacts::kRunReport));

  // 1. Efficiency fit.
  {
    const double eta = recon["eta_fit"]["value"];
    const double se = recon["eta_fit"]["stderr"];
    report(1, std::abs(eta - 0.574) <= 0.01, fmt("eta_fit = %.4f +- %.4f (target 0.574 +- 0.01)", eta, se));
  }

  // 2. Diagonal density-matrix elements.
  std::vector<double> rho;
  for (const auto& e : recon["rho_diag"]) rho.push_back(e["value"]);
  {
    bool ok = std::abs(rho[0] - 0.426) <= 0.01 && std::abs(rho[1] - 0.572) <= 0.01;
    double worst = 0.0;
    for (int n = 2; n <= 9; ++n) worst = std::max(worst, std::abs(rho[n]));
    ok = ok && worst <= 0.02;
    report(2, ok, fmt("rho00 = %.4f, rho11 = %.4f, max |rho_nn| for 2..9 = %.4f", rho[0], rho[1], worst));
  }

  // 3. Wigner function at the origin.
  {
    const double exact = wigner_value(DensityMatrix::lossy_single_photon(0.574), 0.0, 0.0);
    const double measured = wigner_value(DensityMatrix::diagonal(rho), 0.0, 0.0);
    const double reported = recon["wigner_origin"]["dm_route"];
    const bool ok = std::abs(exact - (-0.0942)) <= 1e-4 && measured < 0.0 &&
                    std::abs(measured - (-0.0942)) <= 0.015 && measured == reported;
    report(3, ok,
           fmt("exact W(0,0) = %.5f; reconstructed W(0,0) = %.4f (target -0.0942 +- 0.015, deviation %.4f)", exact,
               measured, measured + 0.0942));
  }

  // 4. Abel versus density-matrix route.
  {
    const double a = recon["rms"]["abel"];
    const double d = recon["rms"]["dm"];
    report(4, a > d && d < 0.01 && a > 2.0 * d,
           fmt("rms_abel = %.4f, rms_dm = %.4f, ratio %.1f", a, d, a / d));
  }

  // 5. Efficiency budget.
  {
    const double total = total_efficiency({0.90, 0.99, 0.7, 0.86, 0.98});
    const double eta = recon["eta_fit"]["value"];
    report(5, std::abs(total - 0.5726) <= 1e-4,
           fmt("total_efficiency = %.5f (target 0.5726 +- 0.0001); fitted eta %.4f", total, eta));
  }

  // 6. Shot-noise calibration.
  {
    const auto& sn = run_report["shotnoise"];
    const double r2 = sn["r2"];
    const double db = sn["sn_db"];
    report(6, r2 > 0.999 && std::abs(db - 12.0) <= 0.5, fmt("R^2 = %.6f, S/N at 7 mW = %.2f dB", r2, db));
  }

  // 7. Property suites.
  {
    std::vector<std::string> notes;
    bool ok = true;

    const double bio = biorthogonality_error(10);
    ok = ok && bio <= 1e-6;
    notes.push_back(fmt("biorth %.1e", bio));

    std::mt19937_64 gen(7);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double semigroup = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const int dim = 2 + trial % 10;
      Eigen::MatrixXcd a(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = {g(gen), g(gen)};
      Eigen::MatrixXcd m = a * a.adjoint();
      const DensityMatrix r(m / m.trace().real());
      const double e1 = u(gen), e2 = u(gen);
      semigroup = std::max(
          semigroup,
          (apply_loss(apply_loss(r, e1), e2).elements() - apply_loss(r, e1 * e2).elements()).cwiseAbs().maxCoeff());
    }
    ok = ok && semigroup <= 1e-10;
    notes.push_back(fmt("semigroup %.1e", semigroup));

    const auto xs = sample_quadratures(DensityMatrix::lossy_single_photon(0.574), 200000, 42);
    const double ks = oracle::ks_statistic(xs, [](double x) { return oracle::lossy_cdf(x, 0.574); });
    ok = ok && ks < 0.005;
    notes.push_back(fmt("KS %.4f", ks));

    const auto signal = read_signal_column(cfg.out_dir / artifacts::kQuadratures);
    const auto mle = mle_reconstruct(signal, cfg.max_n, cfg.mle_max_iters, cfg.mle_tol);
    bool monotone = true;
    for (std::size_t i = 1; i < mle.log_likelihood.size(); ++i)
      monotone = monotone && mle.log_likelihood[i] >= mle.log_likelihood[i - 1] - 1e-9;
    const bool mle_ok = std::abs(mle.rho.trace() - 1.0) <= 1e-10 && mle.rho.min_eigenvalue() >= -1e-10 && monotone;
    ok = ok && mle_ok;
    notes.push_back(fmt("MLE %s (%d iterations)", mle_ok ? "ok" : "bad", mle.iterations));

    AcquisitionSpec spec;
    std::uniform_int_distribution<int> code(0, spec.max_code());
    std::vector<FrameRecord> frames(5000);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      frames[i].index = i;
      frames[i].samples.resize(spec.samples_per_frame);
      for (auto& s : frames[i].samples) s = static_cast<std::uint16_t>(code(gen));
    }
    const auto bytes = encode_frames(frames, spec);
    const auto decoded = decode_frames(bytes);
    const bool hfv_ok = decoded.frames == frames && encode_frames(decoded.frames, decoded.spec) == bytes;
    ok = ok && hfv_ok;
    notes.push_back(std::string("HFV1 ") + (hfv_ok ? "ok" : "bad"));

    const auto again = run_config(root / "again");
    run_pipeline(again, Stage::All);
    bool same = true;
    for (const char* name : {artifacts::kFrames, artifacts::kRunReport, artifacts::kReconstruction,
                             artifacts::kQuadratures, artifacts::kRhoMle}) {
      same = same && slurp(cfg.out_dir / name) == slurp(again.out_dir / name);
    }
    ok = ok && same;
    notes.push_back(std::string("determinism ") + (same ? "ok" : "bad"));

    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
    report(7, ok, detail);
  }

  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
