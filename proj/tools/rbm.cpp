// rbm: generate instances, solve, round, verify and benchmark.
// Exit codes: 0 success, 1 verification failure, 2 usage or input error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rbm/bench.hpp"
#include "rbm/dual_enum.hpp"
#include "rbm/engine.hpp"
#include "rbm/gen.hpp"
#include "rbm/io.hpp"
#include "rbm/oracle.hpp"
#include "rbm/rounding.hpp"

namespace fs = std::filesystem;
using namespace rbm;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

Instance load(const std::string& path, std::int64_t k) {
  auto inst = io::load_instance(path);
  return k > 0 ? inst.with_k(k) : inst;
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

void save_lines(const std::string& path, const std::vector<nlohmann::json>& lines) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& j : lines) out << j.dump() << '\n';
}

std::int64_t k_prime_for(const Instance& inst, std::int64_t override_kp) {
  return override_kp > 0 ? override_kp : pd::derive_k_prime(inst.k());
}

pd::EngineConfig engine_config(const Instance& inst, std::int64_t kp, const std::string& mode) {
  auto cfg = pd::default_config(inst.k(), inst.n());
  cfg.k_prime = kp;
  if (mode != "auto") cfg.mode = pd::parse_candidate_mode(mode);
  cfg.strict = false;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reordering buffer management: online primal-dual, rounding and oracles"};
  app.require_subcommand(1);

  std::string instance_path, out_dir, mode = "auto", verify_level = "assert";
  std::int64_t k = 0, kp_override = 0, seeds = 1;
  std::uint64_t seed = 1;
  double delta = 1.0 / 128.0;

  auto add_instance = [&](CLI::App* sub) {
    sub->add_option("instance", instance_path, "Instance file")->required()->check(CLI::ExistingFile);
    sub->add_option("--k", k, "Buffer size (overrides the file)");
  };

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Write a generated instance");
  gen::GenSpec spec;
  std::string kind = "round_robin", gen_out;
  gen_cmd->add_option("--kind", kind, "round_robin | uniform | zipf | bursty | single_color");
  gen_cmd->add_option("--n", spec.n, "Number of items")->required();
  gen_cmd->add_option("--colors", spec.num_colors, "Number of colors");
  gen_cmd->add_option("--seed", spec.seed, "Generator seed");
  gen_cmd->add_option("--zipf-alpha", spec.zipf_alpha, "Zipf exponent");
  gen_cmd->add_option("--burst-min", spec.burst_min, "Shortest burst");
  gen_cmd->add_option("--burst-max", spec.burst_max, "Longest burst");
  gen_cmd->add_option("--k", k, "Buffer size")->required();
  gen_cmd->add_option("-o,--output", gen_out, "Output file (stdout if omitted)");

  // opt
  auto* opt_cmd = app.add_subcommand("opt", "Exact offline optimum");
  add_instance(opt_cmd);
  bool brute = false;
  opt_cmd->add_flag("--bruteforce", brute, "Use the brute-force enumerator");
  opt_cmd->add_option("--out", out_dir, "Directory for schedule.json");

  // augment
  auto* aug_cmd = app.add_subcommand("augment", "Run the k' buffer algorithm against OPT_k");
  add_instance(aug_cmd);
  aug_cmd->add_option("--k-prime-override", kp_override, "Use this k' instead of the derived one");
  aug_cmd->add_option("--out", out_dir, "Directory for augmented.json and augmented_trace.jsonl");

  // solve-lp
  auto* lp_cmd = app.add_subcommand("solve-lp", "Online primal-dual fractional solution");
  add_instance(lp_cmd);
  lp_cmd->add_option("--k-prime-override", kp_override, "Use this k' instead of the derived one");
  lp_cmd->add_option("--candidate-mode", mode, "auto | exhaustive | pruned");
  lp_cmd->add_option("--verify-level", verify_level, "off | assert | full");
  lp_cmd->add_option("--out", out_dir, "Directory for fractional.json, duals.json, trace.jsonl");

  // round
  auto* round_cmd = app.add_subcommand("round", "Randomized rounding of a fractional solution");
  add_instance(round_cmd);
  std::string frac_path;
  round_cmd->add_option("--frac", frac_path, "Fractional solution (re-runs the engine if omitted)")
      ->check(CLI::ExistingFile);
  round_cmd->add_option("--k-prime-override", kp_override, "Engine k' when re-running");
  round_cmd->add_option("--candidate-mode", mode, "Engine candidate mode when re-running");
  round_cmd->add_option("--delta", delta, "Rounding delta");
  round_cmd->add_option("--seed", seed, "RNG seed");
  round_cmd->add_option("--seeds", seeds, "Number of consecutive seeds to summarize");
  round_cmd->add_option("--out", out_dir, "Directory for schedule.json and phases.jsonl");

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "Check stored artifacts");
  add_instance(ver_cmd);
  std::string dual_path, sched_path;
  ver_cmd->add_option("--frac", frac_path, "Fractional solution")->check(CLI::ExistingFile);
  ver_cmd->add_option("--dual", dual_path, "Dual solution")->check(CLI::ExistingFile);
  ver_cmd->add_option("--schedule", sched_path, "Integral schedule")->check(CLI::ExistingFile);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "End-to-end experiment over a config");
  std::string config_path;
  std::vector<std::int64_t> bench_ks;
  bool no_plot = false, timing = false;
  bench_cmd->add_option("--config", config_path, "Config file (default suite if omitted)")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--k", bench_ks, "Buffer sizes, replacing the config list");
  bench_cmd->add_option("--k-prime-override", kp_override, "Use this k' everywhere");
  bench_cmd->add_option("--delta", delta, "Rounding delta");
  bench_cmd->add_option("--seed", seed, "First rounding seed");
  bench_cmd->add_option("--seeds", seeds, "Rounding seeds per job");
  bench_cmd->add_option("--candidate-mode", mode, "auto | exhaustive | pruned");
  bench_cmd->add_option("--verify-level", verify_level, "off | assert | full");
  bench_cmd->add_option("--out", out_dir, "Directory for bench.csv and bench.svg");
  bench_cmd->add_flag("--no-plot", no_plot, "Skip the SVG");
  bench_cmd->add_flag("--timing", timing, "Fill runtime_ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) {
      spec.kind = gen::parse_kind(kind);
      std::vector<std::string> warnings;
      const auto inst = gen::generate(spec, k, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      if (gen_out.empty()) io::write_instance(std::cout, inst);
      else io::save_instance(gen_out, inst);
      return kOk;
    }

    if (*opt_cmd) {
      const auto inst = load(instance_path, k);
      if (brute) {
        std::cout << oracle::opt_cost_bruteforce(inst) << '\n';
        return kOk;
      }
      const auto opt = oracle::opt_schedule(inst);
      std::cout << opt.cost << '\n';
      if (!out_dir.empty()) io::save_json(out_path(out_dir, "schedule.json"), io::to_json(opt.schedule));
      return kOk;
    }

    if (*aug_cmd) {
      const auto inst = load(instance_path, k);
      const auto kp = k_prime_for(inst, kp_override);
      const auto opt = oracle::opt_schedule(inst);
      const auto res = oracle::run_augmented(inst, inst.k(), kp, opt.schedule);
      const auto cost = count_runs(res.schedule.output, inst);
      const double bound = oracle::augmented_cost_bound(inst.k(), kp);
      std::cout << "opt_k " << opt.cost << "\naugmented_cost " << cost << "\nbound " << bound * opt.cost
                << "\nmax_p " << res.trace.max_p << "\nmin_phi_before_step2 " << res.trace.min_phi_before_step2
                << '\n';
      if (!out_dir.empty()) {
        io::save_json(out_path(out_dir, "augmented.json"), io::to_json(res.schedule));
        std::vector<nlohmann::json> lines;
        for (const auto& s : res.trace.trace) lines.push_back(oracle::to_json(s));
        save_lines(out_path(out_dir, "augmented_trace.jsonl"), lines);
      }
      const bool ok = check_schedule(res.schedule, inst.with_k(kp)).valid && res.trace.max_p < inst.k() - kp &&
                      static_cast<double>(cost) <= bound * static_cast<double>(opt.cost) + 1e-9;
      if (!ok) std::cerr << "augmented run breaks its guarantees\n";
      return ok ? kOk : kFailed;
    }

    if (*lp_cmd) {
      const auto inst = load(instance_path, k);
      const auto level = bench::parse_verify_level(verify_level);
      auto cfg = engine_config(inst, k_prime_for(inst, kp_override), mode);
      cfg.record_trace = !out_dir.empty();
      const auto res = pd::run(inst, cfg);
      std::cout << "k " << inst.k() << "\nk_prime " << cfg.k_prime << "\nmode " << pd::to_string(cfg.mode)
                << "\nfrac_obj " << res.x.objective() << "\ndual_obj " << res.duals.objective() << "\nscale "
                << res.duals.scale << "\nsteps " << res.diag.steps << "\nmax_xhat " << res.diag.max_xhat << '\n';
      if (!out_dir.empty()) {
        io::save_json(out_path(out_dir, "fractional.json"), io::to_json(res.x, inst));
        io::save_json(out_path(out_dir, "duals.json"), pd::to_json(res.duals));
        if (std::isfinite(res.duals.scale))
          io::save_json(out_path(out_dir, "dual.json"), io::to_json(res.duals.scaled_dual()));
        save_lines(out_path(out_dir, "trace.jsonl"), res.trace);
      }
      if (level == bench::VerifyLevel::kOff) return kOk;
      int bad = 0;
      const auto lp = check_lp_feasibility(res.x, inst);
      if (!lp.feasible) {
        std::cerr << "primal infeasible: " << lp.violations.size() << " violations\n";
        ++bad;
      }
      if (res.diag.invariant_failures() > 0) {
        std::cerr << "invariant failures: " << res.diag.invariant_failures() << '\n';
        ++bad;
      }
      if (level == bench::VerifyLevel::kFull && std::isfinite(res.duals.scale) &&
          !dual_feasible(res.duals.scaled_dual(), inst.with_k(cfg.k_prime))) {
        std::cerr << "scaled dual infeasible\n";
        ++bad;
      }
      return bad ? kFailed : kOk;
    }

    if (*round_cmd) {
      const auto inst = load(instance_path, k);
      FractionalSolution frac;
      if (!frac_path.empty()) {
        frac = io::fractional_from_json(io::load_json(frac_path), inst);
      } else {
        auto cfg = engine_config(inst, k_prime_for(inst, kp_override), mode);
        cfg.record_trace = false;
        frac = pd::run(inst, cfg).x;
      }
      round::RoundingConfig rc;
      rc.delta = delta;
      rc.rng_seed = seed;
      const auto res = round::round(inst, frac, rc);
      const auto check = check_schedule(res.schedule, inst);
      std::cout << "cost " << count_runs(res.schedule.output, inst) << "\nphases " << res.phases.size()
                << "\nfrac_obj " << frac.objective() << '\n';
      if (seeds > 1) {
        const round::FractionalStream stream(inst, frac);
        const auto outs = round::round_seeds(inst, stream, rc, seeds);
        double sum = 0.0;
        for (const auto& o : outs) sum += static_cast<double>(o.cost);
        std::cout << "mean_cost " << sum / static_cast<double>(outs.size()) << " over " << outs.size()
                  << " seeds\n";
      }
      if (!out_dir.empty()) {
        io::save_json(out_path(out_dir, "schedule.json"), io::to_json(res.schedule));
        save_lines(out_path(out_dir, "phases.jsonl"), round::phase_log(res, inst));
      }
      if (!check.valid) {
        for (const auto& p : check.problems) std::cerr << "schedule: " << p << '\n';
        return kFailed;
      }
      return kOk;
    }

    if (*ver_cmd) {
      const auto inst = load(instance_path, k);
      int bad = 0;
      int checked = 0;
      if (!frac_path.empty()) {
        ++checked;
        try {
          const auto frac = io::fractional_from_json(io::load_json(frac_path), inst);
          const auto rep = check_lp_feasibility(frac, inst);
          for (const auto& v : rep.violations) {
            if (v.kind == LpViolation::Kind::kCoverage)
              std::cout << "coverage violation: item " << v.index << " covered " << v.value << '\n';
            else
              std::cout << "usage violation: slot " << v.index << " used " << v.value << '\n';
          }
          if (!rep.feasible) ++bad;
          else std::cout << "fractional: feasible, objective " << frac.objective() << '\n';
        } catch (const Error& e) {
          std::cout << "fractional: " << e.what() << '\n';
          ++bad;
        }
      }
      if (!dual_path.empty()) {
        ++checked;
        const auto d = io::dual_from_json(io::load_json(dual_path));
        const auto axis = inst.with_k(d.kappa);
        const auto v = dual_max_violation(d, axis);
        bool neg = false;
        for (double y : d.y) neg |= y < -kFeasTol;
        for (double z : d.z) neg |= z < -kFeasTol;
        if (v.max_lhs > 1.0 + kFeasTol || neg) {
          std::cout << "dual violation: max constraint " << v.max_lhs << (neg ? ", negative entry" : "") << '\n';
          ++bad;
        } else {
          std::cout << "dual: feasible, objective " << d.objective() << '\n';
        }
      }
      if (!sched_path.empty()) {
        ++checked;
        const auto s = io::schedule_from_json(io::load_json(sched_path));
        const auto rep = check_schedule(s, inst.with_k(s.k));
        for (const auto& p : rep.problems) std::cout << "schedule violation: " << p << '\n';
        if (!rep.valid) ++bad;
        else std::cout << "schedule: valid, cost " << count_runs(s.output, inst) << '\n';
      }
      if (checked == 0) {
        std::cerr << "verify: nothing to check (pass --frac, --dual or --schedule)\n";
        return kUsage;
      }
      return bad ? kFailed : kOk;
    }

    if (*bench_cmd) {
      auto cfg = config_path.empty() ? bench::default_suite() : bench::load_config(config_path);
      if (!bench_ks.empty()) cfg.ks = bench_ks;
      if (kp_override > 0) cfg.k_prime_override = kp_override;
      if (bench_cmd->count("--delta")) cfg.delta = delta;
      if (bench_cmd->count("--seed")) cfg.seed = seed;
      if (bench_cmd->count("--seeds")) cfg.rounding_seeds = seeds;
      if (bench_cmd->count("--candidate-mode") && mode != "auto") cfg.mode = pd::parse_candidate_mode(mode);
      if (bench_cmd->count("--verify-level")) cfg.verify = bench::parse_verify_level(verify_level);
      if (timing) cfg.timing = true;
      if (!out_dir.empty()) {
        cfg.csv_path = out_path(out_dir, "bench.csv");
        if (!no_plot) cfg.svg_path = out_path(out_dir, "bench.svg");
      }
      if (no_plot) cfg.svg_path.clear();
      const auto rows = bench::run_experiment(cfg);
      if (cfg.csv_path.empty()) {
        bench::write_csv(std::cout, rows);
      } else {
        std::ofstream csv(cfg.csv_path);
        bench::write_csv(csv, rows);
      }
      if (!cfg.svg_path.empty()) {
        std::ofstream svg(cfg.svg_path);
        bench::write_svg(svg, rows);
      }
      for (const auto& r : rows)
        if (!r.error.empty()) std::cerr << r.instance << " k=" << r.k << ": " << r.error << '\n';
      const auto v = bench::total_violations(rows);
      std::cerr << rows.size() << " rows, " << v << " violations\n";
      return v ? kFailed : kOk;
    }
  } catch (const pd::EngineError& e) {
    std::cerr << "engine: " << e.what() << '\n';
    return kFailed;
  } catch (const round::RoundingError& e) {
    std::cerr << "rounding: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
