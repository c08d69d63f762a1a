// Command-line front end: simulate sessions, verify attack robustness, sweep
// attack families, and print the efficiency comparison. All file output goes
// under --out-dir and is byte-identical across reruns with the same options.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sqkd/sqkd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;
constexpr int kExitViolation = 3;

struct AttackOptions {
  std::string kind = "none";  // none | double-cnot | intercept-resend | rotation | file
  std::string file;
  double theta_p = 0.0;
  double theta_s = 0.0;
  std::string ir_basis = "ZpZs";
};

void add_attack_options(CLI::App* cmd, AttackOptions& opt) {
  cmd->add_option("--attack", opt.kind, "Attack model")
      ->check(CLI::IsMember({"none", "double-cnot", "intercept-resend", "rotation", "file"}))
      ->capture_default_str();
  cmd->add_option("--attack-file", opt.file, "JSON attack description (with --attack file)");
  cmd->add_option("--theta-p", opt.theta_p, "Rotation angle on the polarization-coupled probe qubit")
      ->capture_default_str();
  cmd->add_option("--theta-s", opt.theta_s, "Rotation angle on the spatial-coupled probe qubit")
      ->capture_default_str();
  cmd->add_option("--ir-basis", opt.ir_basis, "Intercept-resend measurement basis")
      ->check(CLI::IsMember({"ZpZs", "ZpXs", "XpZs", "XpXs"}))
      ->capture_default_str();
}

std::unique_ptr<sqkd::AttackModel> build_attack(const AttackOptions& opt) {
  if (opt.kind == "none") return std::make_unique<sqkd::NoAttack>();
  if (opt.kind == "double-cnot") return std::make_unique<sqkd::DoubleCnotAttack>();
  if (opt.kind == "intercept-resend")
    return std::make_unique<sqkd::InterceptResendAttack>(sqkd::basis_from_name(opt.ir_basis));
  if (opt.kind == "rotation")
    return std::make_unique<sqkd::EntangleMeasureAttack>(opt.theta_p, opt.theta_s);
  if (opt.file.empty())
    throw sqkd::AttackFileError("--attack file requires --attack-file PATH");
  return sqkd::load_attack_file(opt.file);
}

void write_json(const std::filesystem::path& path, const sqkd::json& j) {
  sqkd::write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulator and security-analysis toolkit for a semiquantum key distribution protocol "
      "over single photons carrying polarization and spatial-mode degrees of freedom."};
  app.set_config("--config", "", "Read options from an INI config file (flags override)");
  app.require_subcommand(1);
  // global options (--out-dir, --config) may appear after the subcommand
  app.fallthrough();

  std::string out_dir = "out";
  app.add_option("--out-dir", out_dir, "Directory for all output files")->capture_default_str();

  // --- simulate ---------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Run one protocol session");
  sqkd::ProtocolParams params;
  std::string mode = "monte-carlo";
  AttackOptions sim_attack;
  sim->add_option("--n", params.n, "Raw key length in bits (even)")->capture_default_str();
  sim->add_option("--delta", params.delta, "Oversampling margin")->capture_default_str();
  sim->add_option("--seed", params.seed, "Random seed")->capture_default_str();
  sim->add_option("--mode", mode, "Session mode")
      ->check(CLI::IsMember({"exact", "monte-carlo"}))
      ->capture_default_str();
  sim->add_option("--threshold-ctrl", params.ctrl_threshold, "CTRL error-rate threshold")
      ->capture_default_str();
  sim->add_option("--threshold-non-zz-sift", params.non_zz_sift_threshold,
                  "Non-(Zp,Zs) SIFT error-rate threshold")
      ->capture_default_str();
  sim->add_option("--threshold-zz-sift", params.zz_sift_threshold,
                  "(Zp,Zs) SIFT error-rate threshold")
      ->capture_default_str();
  add_attack_options(sim, sim_attack);

  // --- verify -----------------------------------------------------------
  auto* ver = app.add_subcommand("verify", "Check an attack against the no-detection/no-information property");
  AttackOptions ver_attack;
  ver_attack.kind = "double-cnot";
  double detect_tol = sqkd::kDetectTol;
  double info_tol = sqkd::kInfoTol;
  int random_samples = 0;
  std::uint64_t random_seed = 7;
  int ver_jobs = 1;
  add_attack_options(ver, ver_attack);
  ver->add_option("--tol-detect", detect_tol, "Detection probability tolerance")
      ->capture_default_str();
  ver->add_option("--tol-info", info_tol, "Probe distinguishability tolerance")
      ->capture_default_str();
  ver->add_option("--random", random_samples,
                  "Additionally verify this many Haar-random unitary attack pairs")
      ->capture_default_str();
  ver->add_option("--random-seed", random_seed, "Seed for the random attack sweep")
      ->capture_default_str();
  ver->add_option("--jobs", ver_jobs, "Worker threads for the random sweep")
      ->capture_default_str();

  // --- sweep ------------------------------------------------------------
  auto* swp = app.add_subcommand("sweep", "Detection/information tradeoff over the rotation family");
  std::string vary = "p";
  double sweep_from = 0.0;
  double sweep_to = 1.5707963267948966;
  int sweep_points = 33;
  double fixed_theta = 0.0;
  int sweep_jobs = 1;
  swp->add_option("--vary", vary, "Which rotation angle the parameter drives")
      ->check(CLI::IsMember({"p", "s", "both"}))
      ->capture_default_str();
  swp->add_option("--from", sweep_from, "First angle (radians)")->capture_default_str();
  swp->add_option("--to", sweep_to, "Last angle (radians)")->capture_default_str();
  swp->add_option("--points", sweep_points, "Grid size")->check(CLI::PositiveNumber)
      ->capture_default_str();
  swp->add_option("--fixed-theta", fixed_theta, "Value of the angle held fixed")
      ->capture_default_str();
  swp->add_option("--jobs", sweep_jobs, "Worker threads")->capture_default_str();

  // --- efficiency -------------------------------------------------------
  auto* eff = app.add_subcommand("efficiency", "Qubit-efficiency comparison table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::filesystem::path out(out_dir);
  try {
    if (sim->parsed()) {
      params.mode = (mode == "exact") ? sqkd::SessionMode::Exact : sqkd::SessionMode::MonteCarlo;
      const auto attack = build_attack(sim_attack);
      const sqkd::SessionReport report = sqkd::run_session(params, *attack);
      write_json(out / "session.json", sqkd::session_to_json(report));
      sqkd::write_text_atomic(out / "transcript.csv", sqkd::transcript_csv(report));
      std::printf(
          "verdict=%s mode=%s attack=%s n=%d delta=%g seed=%llu "
          "rates=[%.6g,%.6g,%.6g] key_bits=%ld mismatch=%.6g\n",
          sqkd::verdict_name(report.verdict).c_str(), sqkd::session_mode_name(params.mode).c_str(),
          report.attack_name.c_str(), params.n, params.delta,
          static_cast<unsigned long long>(params.seed), report.rates[0], report.rates[1],
          report.rates[2], report.keys ? static_cast<long>(report.keys->alice.size()) : 0L,
          report.keys ? report.keys->mismatch_rate : 0.0);
      return report.verdict == sqkd::Verdict::Accept ? kExitOk : kExitAbort;
    }

    if (ver->parsed()) {
      const auto attack = build_attack(ver_attack);
      const sqkd::RobustnessReport report = sqkd::theorem1_verify(*attack, detect_tol, info_tol);
      sqkd::json j = sqkd::robustness_to_json(report);
      j["detection_profile"] = sqkd::detection_profile_to_json(sqkd::exact_detection(*attack));
      bool violation = report.verdict == sqkd::RobustnessVerdict::Violation;
      if (random_samples > 0) {
        const sqkd::RandomSweepSummary sweep =
            sqkd::random_attack_sweep(random_samples, random_seed, detect_tol, info_tol, ver_jobs);
        j["random_sweep"] = sqkd::random_sweep_to_json(sweep);
        violation = violation || sweep.violations > 0;
      } else {
        j["random_sweep"] = nullptr;
      }
      write_json(out / "robustness.json", j);
      std::printf("verdict=%s attack=%s max_detection=%.6g max_probe_td=%.6g holevo_bits=%.6g\n",
                  sqkd::robustness_verdict_name(report.verdict).c_str(),
                  report.attack_name.c_str(), report.max_detection,
                  report.max_probe_trace_distance, report.holevo_bits);
      return violation ? kExitViolation : kExitOk;
    }

    if (swp->parsed()) {
      std::vector<double> grid;
      grid.reserve(sweep_points);
      for (int i = 0; i < sweep_points; ++i)
        grid.push_back(sweep_points == 1
                           ? sweep_from
                           : sweep_from + (sweep_to - sweep_from) * i / (sweep_points - 1));
      sqkd::AttackFactory factory = [&](double t) -> std::unique_ptr<sqkd::AttackModel> {
        if (vary == "p") return std::make_unique<sqkd::EntangleMeasureAttack>(t, fixed_theta);
        if (vary == "s") return std::make_unique<sqkd::EntangleMeasureAttack>(fixed_theta, t);
        return std::make_unique<sqkd::EntangleMeasureAttack>(t, t);
      };
      const auto points = sqkd::tradeoff_sweep(factory, grid, sweep_jobs);
      sqkd::write_text_atomic(out / "sweep.csv", sqkd::sweep_csv(points));
      std::printf("sweep points=%zu vary=%s detection=[%.6g..%.6g] holevo_bits=[%.6g..%.6g]\n",
                  points.size(), vary.c_str(), points.front().detection, points.back().detection,
                  points.front().holevo_bits, points.back().holevo_bits);
      return kExitOk;
    }

    if (eff->parsed()) {
      const auto rows = sqkd::efficiency_table();
      write_json(out / "efficiency.json", sqkd::efficiency_to_json(rows));
      const std::string table = sqkd::efficiency_text_table(rows);
      sqkd::write_text_atomic(out / "efficiency.txt", table);
      std::fputs(table.c_str(), stdout);
      return kExitOk;
    }
  } catch (const sqkd::InsufficientRounds& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const sqkd::AttackFileError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const sqkd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
