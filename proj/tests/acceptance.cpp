// Acceptance checks, one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rbm/bench.hpp"
#include "rbm/dual_enum.hpp"
#include "rbm/engine.hpp"
#include "rbm/gen.hpp"
#include "rbm/oracle.hpp"
#include "rbm/rounding.hpp"

using namespace rbm;

namespace {

constexpr double kLpTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kScaleFactor = 25.0;
constexpr double kPrimalDualRatio = 100.0;
constexpr double kXhatCap = 1.1 + 1e-9;
constexpr double kRoundFracEnvelope = 50.0;
constexpr double kRoundOptEnvelope = 50.0;
constexpr double kWeakDualityTol = 1e-6;
constexpr double kLargeRunBudgetS = 600.0;

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Summary {
  std::vector<double> v;
  void add(double x) { v.push_back(x); }
  std::string str() {
    if (v.empty()) return "n=0";
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    auto q = [&](double p) { return v[static_cast<std::size_t>(p * static_cast<double>(v.size() - 1))]; };
    char buf[160];
    std::snprintf(buf, sizeof buf, "n=%zu min=%.4g median=%.4g mean=%.4g p90=%.4g max=%.4g", v.size(), v.front(),
                  q(0.5), sum / static_cast<double>(v.size()), q(0.9), v.back());
    return buf;
  }
  double max() const { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

struct SuiteCase {
  Instance inst;
  std::string id;
  pd::EngineResult res;
};

const gen::Kind kFamilies[] = {gen::Kind::kRoundRobin, gen::Kind::kUniform, gen::Kind::kZipf, gen::Kind::kBursty};
const std::int64_t kKs[] = {12, 16, 32, 64};

gen::GenSpec suite_spec(int i) {
  gen::GenSpec g;
  g.kind = kFamilies[i % 4];
  g.n = 50 + 25 * ((i / 16) % 15);  // 50 .. 400
  g.num_colors = 3 + (i / 4) % 5;
  g.seed = static_cast<std::uint64_t>(1000 + i);
  return g;
}

std::vector<SuiteCase> build_suite() {
  std::vector<SuiteCase> out;
  for (int i = 0; i < 200; ++i) {
    const auto g = suite_spec(i);
    const std::int64_t k = kKs[(i / 4) % 4];
    auto inst = gen::generate(g, k);
    auto cfg = pd::default_config(k, g.n);
    cfg.record_trace = false;
    cfg.strict = false;
    auto res = pd::run(inst, cfg);
    out.push_back({std::move(inst), bench::instance_id(g) + "-k" + std::to_string(k), std::move(res)});
  }
  return out;
}

void criterion1(const std::vector<SuiteCase>& suite, double secs) {
  int bad = 0;
  std::string first;
  for (const auto& c : suite) {
    const auto rep = check_lp_feasibility(c.res.x, c.inst, kLpTol);
    if (!rep.feasible) {
      if (!bad) first = " first=" + c.id;
      ++bad;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu instances, %d infeasible, engine time %.1fs", suite.size(), bad, secs);
  report(1, bad == 0, buf + first);
}

void criterion2(const std::vector<SuiteCase>& suite) {
  int checked = 0, bad = 0;
  Summary ratio;
  double worst = 0.0;
  std::string first;
  for (const auto& c : suite) {
    if (checked == 50) break;
    if (c.inst.n() > 200) continue;
    if (pd::default_config(c.inst.k(), c.inst.n()).mode != pd::CandidateMode::kExhaustive) continue;
    ++checked;
    const auto& d = c.res.duals;
    const double lnln = 1.0 + std::log(std::log(static_cast<double>(c.inst.k())));
    bool ok = std::isfinite(d.scale) && d.scale <= kScaleFactor * lnln;
    if (std::isfinite(d.scale)) {
      ratio.add(d.scale / lnln);
      const auto v = dual_max_violation(d.scaled_dual(), c.inst.with_k(d.k_prime));
      worst = std::max(worst, v.max_lhs);
      ok = ok && v.max_lhs <= 1.0 + kDualTol;
      for (double y : d.scaled_dual().y) ok = ok && y >= -kDualTol;
      for (double z : d.scaled_dual().z) ok = ok && z >= -kDualTol;
    }
    if (!ok) {
      if (!bad) first = " first=" + c.id;
      ++bad;
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d instances, %d failing, max scaled lhs %.12f; scale/(1+lnln k): ", checked, bad,
                worst);
  report(2, bad == 0 && checked == 50, buf + ratio.str() + first);
}

void criterion3(const std::vector<SuiteCase>& suite) {
  int bad = 0;
  Summary ratio;
  for (const auto& c : suite) {
    const double frac = c.res.x.objective();
    const double dual = c.res.duals.objective();
    if (frac > kPrimalDualRatio * dual + 1e-9) ++bad;
    if (dual > 0.0) ratio.add(frac / dual);
  }
  report(3, bad == 0, std::to_string(bad) + " failing; frac/dual: " + ratio.str());
}

void criterion4(const std::vector<SuiteCase>& suite) {
  std::int64_t xhat_bad = 0, block_bad = 0, block_checks = 0;
  double worst = 0.0;
  for (const auto& c : suite) {
    worst = std::max(worst, c.res.diag.max_xhat);
    if (c.res.diag.max_xhat > kXhatCap) ++xhat_bad;
    xhat_bad += c.res.diag.xhat_violations;
    block_bad += c.res.diag.block_bound_violations;
    block_checks += c.res.diag.block_bound_checks;
  }

  gen::GenSpec g;
  g.kind = gen::Kind::kZipf;
  g.n = 5000;
  g.num_colors = 50;
  g.seed = 4;
  const auto inst = gen::generate(g, 1024);
  auto cfg = pd::default_config(1024, g.n);
  cfg.mode = pd::CandidateMode::kPruned;
  cfg.record_trace = false;
  cfg.strict = false;
  const auto t0 = std::chrono::steady_clock::now();
  const auto big = pd::run(inst, cfg);
  const double secs = seconds_since(t0);
  const bool feasible = check_lp_feasibility(big.x, inst, kLpTol).feasible;
  const bool big_ok = big.diag.max_xhat <= kXhatCap && big.diag.invariant_failures() == 0 && feasible &&
                      secs < kLargeRunBudgetS;

  char buf[320];
  std::snprintf(buf, sizeof buf,
                "suite max xhat %.6f, xhat violations %lld, block violations %lld; k=1024 n=5000 pruned: %.1fs, "
                "max xhat %.6f, block checks %lld, block violations %lld, feasible %s",
                worst, static_cast<long long>(xhat_bad), static_cast<long long>(block_bad), secs,
                big.diag.max_xhat, static_cast<long long>(big.diag.block_bound_checks),
                static_cast<long long>(big.diag.block_bound_violations), feasible ? "yes" : "no");
  (void)block_checks;
  report(4, xhat_bad == 0 && block_bad == 0 && big_ok, buf);
}

double mean_round_ratio(const Instance& inst, const FractionalSolution& x, int& invalid) {
  round::RoundingConfig rc;
  rc.rng_seed = 1;
  const round::FractionalStream stream(inst, x);
  const auto outs = round::round_seeds(inst, stream, rc, 50);
  double sum = 0.0;
  for (const auto& o : outs) {
    if (!o.valid) ++invalid;
    sum += static_cast<double>(o.cost);
  }
  return sum / 50.0 / x.objective();
}

// Twelve suite instances plus eight at k = 1024, where x is fractional.
void criterion5(const std::vector<SuiteCase>& suite) {
  int used = 0, invalid = 0, over = 0;
  Summary small, large;
  for (const auto& c : suite) {
    if (used == 12) break;
    if (c.inst.n() > 150) continue;
    ++used;
    const double r = mean_round_ratio(c.inst, c.res.x, invalid);
    small.add(r);
    if (r > kRoundFracEnvelope) ++over;
  }
  std::int64_t fractional_batches = 0;
  for (int i = 0; i < 8; ++i) {
    gen::GenSpec g;
    g.kind = i % 3 == 0 ? gen::Kind::kZipf : i % 3 == 1 ? gen::Kind::kUniform : gen::Kind::kBursty;
    g.n = 2000;
    g.num_colors = 60 + 10 * i;
    g.seed = static_cast<std::uint64_t>(300 + i);
    const auto inst = gen::generate(g, 1024);
    auto cfg = pd::default_config(1024, g.n);
    cfg.record_trace = false;
    cfg.strict = false;
    const auto res = pd::run(inst, cfg);
    for (const auto& b : res.x.batches) fractional_batches += b.weight < 1.0 - 1e-9;
    ++used;
    const double r = mean_round_ratio(inst, res.x, invalid);
    large.add(r);
    if (r > kRoundFracEnvelope) ++over;
  }
  report(5, invalid == 0 && over == 0 && used == 20,
         std::to_string(used) + " instances x 50 seeds, " + std::to_string(invalid) + " invalid, " +
             std::to_string(over) + " over envelope; mean/frac k<=64: " + small.str() + "; k=1024 (" +
             std::to_string(fractional_batches) + " fractional batches): " + large.str());
}

struct Tiny {
  Instance inst;
  std::int64_t k_prime;
  oracle::OptResult opt;
};

std::vector<Tiny> tiny_suite() {
  std::vector<Tiny> out;
  for (int i = 0; i < 30; ++i) {
    gen::GenSpec g;
    g.kind = kFamilies[i % 4];
    g.n = 10 + i % 11;
    g.num_colors = 2 + i % 3;
    g.seed = static_cast<std::uint64_t>(500 + i);
    const std::int64_t k = i % 2 ? 16 : 12;
    auto inst = gen::generate(g, k);
    auto opt = oracle::opt_schedule(inst);
    out.push_back({std::move(inst), pd::derive_k_prime(k), std::move(opt)});
  }
  return out;
}

void criterion6(const std::vector<Tiny>& tiny) {
  int over = 0, weak = 0, invalid = 0;
  Summary ratio;
  for (const auto& t : tiny) {
    auto cfg = pd::default_config(t.inst.k(), t.inst.n());
    cfg.record_trace = false;
    cfg.strict = false;
    const auto res = pd::run(t.inst, cfg);
    round::RoundingConfig rc;
    const round::FractionalStream stream(t.inst, res.x);
    const auto outs = round::round_seeds(t.inst, stream, rc, 20);
    double sum = 0.0;
    for (const auto& o : outs) {
      invalid += o.valid ? 0 : 1;
      sum += static_cast<double>(o.cost);
    }
    const double r = sum / 20.0 / static_cast<double>(t.opt.cost);
    ratio.add(r);
    if (r > kRoundOptEnvelope) ++over;
    const auto opt_kp = oracle::opt_schedule(t.inst.with_k(t.k_prime)).cost;
    if (!std::isfinite(res.duals.scale) ||
        res.duals.scaled_dual().objective() > static_cast<double>(opt_kp) + kWeakDualityTol)
      ++weak;
  }
  report(6, over == 0 && weak == 0 && invalid == 0,
         std::to_string(tiny.size()) + " instances, " + std::to_string(over) + " over envelope, " +
             std::to_string(weak) + " weak-duality failures, " + std::to_string(invalid) +
             " invalid; mean/opt: " + ratio.str());
}

void criterion7(const std::vector<Tiny>& tiny) {
  int bad = 0;
  std::int64_t steps = 0, step2 = 0;
  for (const auto& t : tiny) {
    const auto k = t.inst.k();
    const auto kp = t.k_prime;
    const auto r = oracle::run_augmented(t.inst, k, kp, t.opt.schedule);
    bool ok = check_schedule(r.schedule, t.inst.with_k(kp)).valid;
    for (const auto& s : r.trace.trace) {
      ++steps;
      for (const auto& [color, p] : s.p) ok = ok && p < k - kp;
      if (s.fired == "step2") {
        ++step2;
        ok = ok && s.phi_max >= static_cast<double>(kp) / (1.0 + std::log(static_cast<double>(kp)));
      }
    }
    ok = ok && r.trace.max_p < k - kp;
    const auto cost = count_runs(r.schedule.output, t.inst);
    ok = ok && static_cast<double>(cost) <= oracle::augmented_cost_bound(k, kp) * static_cast<double>(t.opt.cost);
    if (!ok) ++bad;
  }
  report(7, bad == 0,
         std::to_string(tiny.size()) + " instances, " + std::to_string(bad) + " failing, " + std::to_string(steps) +
             " steps (" + std::to_string(step2) + " step2)");
}

void criterion8() {
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    gen::GenSpec g;
    g.kind = kFamilies[i % 4];
    g.n = 1 + i % 12;
    g.num_colors = 1 + i % 5;
    g.seed = static_cast<std::uint64_t>(7000 + i);
    const auto inst = gen::generate(g, 1 + i % 5);
    if (oracle::opt_schedule(inst).cost != oracle::opt_cost_bruteforce(inst)) ++bad;
  }
  report(8, bad == 0, "100 instances, " + std::to_string(bad) + " mismatches");
}

std::string engine_bytes(const Instance& inst) {
  auto cfg = pd::default_config(inst.k(), inst.n());
  const auto r = pd::run(inst, cfg);
  std::string s;
  for (const auto& j : r.trace) s += j.dump() + '\n';
  return s + pd::to_json(r.duals).dump();
}

std::string rounding_bytes(const Instance& inst, const FractionalSolution& x) {
  round::RoundingConfig rc;
  rc.rng_seed = 3;
  const auto r = round::round(inst, x, rc);
  std::string s;
  for (const auto& j : round::phase_log(r, inst)) s += j.dump() + '\n';
  for (Item i : r.schedule.output) s += std::to_string(i) + ' ';
  return s;
}

std::string csv_bytes() {
  std::istringstream in(
      "families = uniform, bursty\nn = 18\ncolors = 3\ninstance_seeds = 1-2\nk = 12, 16\nrounding_seeds = 5\n"
      "verify = full\naugmented = on\n");
  const auto cfg = bench::parse_config(in);
  std::ostringstream out;
  bench::write_csv(out, bench::run_experiment(cfg));
  return out.str();
}

void criterion9() {
  gen::GenSpec g;
  g.kind = gen::Kind::kZipf;
  g.n = 150;
  g.num_colors = 6;
  g.seed = 9;
  const auto inst = gen::generate(g, 32);
  auto cfg = pd::default_config(32, g.n);
  cfg.record_trace = false;
  const auto x = pd::run(inst, cfg).x;
  const bool trace = engine_bytes(inst) == engine_bytes(inst);
  const bool rounding = rounding_bytes(inst, x) == rounding_bytes(inst, x);
  const bool csv = csv_bytes() == csv_bytes();
  report(9, trace && rounding && csv,
         std::string("engine traces ") + (trace ? "equal" : "differ") + ", rounding logs and schedules " +
             (rounding ? "equal" : "differ") + ", bench csv " + (csv ? "equal" : "differ"));
}

}  // namespace

int main() {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto suite = build_suite();
    const double engine_secs = seconds_since(t0);
    criterion1(suite, engine_secs);
    criterion2(suite);
    criterion3(suite);
    criterion4(suite);
    criterion5(suite);
    const auto tiny = tiny_suite();
    criterion6(tiny);
    criterion7(tiny);
    criterion8();
    criterion9();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failing\n", failures);
  return failures == 0 ? 0 : 1;
}
