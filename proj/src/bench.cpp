#include "rbm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "rbm/dual_enum.hpp"
#include "rbm/io.hpp"
#include "rbm/oracle.hpp"
#include "rbm/rounding.hpp"

namespace rbm::bench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error("config key '" + key + "': bad integer '" + s + "'");
  return v;
}

double to_real(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error("config key '" + key + "': bad number '" + s + "'");
  return v;
}

bool to_switch(const std::string& key, const std::string& s) {
  if (s == "on" || s == "true" || s == "1") return true;
  if (s == "off" || s == "false" || s == "0") return false;
  throw Error("config key '" + key + "': expected on or off, got '" + s + "'");
}

std::pair<std::int64_t, std::int64_t> to_range(const std::string& key, const std::string& s) {
  const auto dash = s.find('-', 1);
  if (dash == std::string::npos) {
    const auto v = to_int(key, s);
    return {v, v};
  }
  return {to_int(key, s.substr(0, dash)), to_int(key, s.substr(dash + 1))};
}

std::vector<std::int64_t> int_list(const std::string& key, const std::string& s) {
  std::vector<std::int64_t> out;
  for (const auto& tok : split_list(s)) {
    const auto [lo, hi] = to_range(key, tok);
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <class T>
std::string fmt_opt(const std::optional<T>& v) {
  if (!v) return "NA";
  if constexpr (std::is_floating_point_v<T>) return fmt(*v);
  else return std::to_string(*v);
}

struct Job {
  std::size_t source;
  std::int64_t k;
};

std::vector<Job> jobs_of(const ExperimentConfig& cfg) {
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < cfg.instances.size(); ++s) {
    if (cfg.ks.empty()) {
      if (!cfg.instances[s].path) throw Error("generated instances need at least one k");
      jobs.push_back({s, 0});
    }
    for (auto k : cfg.ks) jobs.push_back({s, k});
  }
  return jobs;
}

Instance materialize(const InstanceSource& src, std::int64_t k) {
  if (src.spec) return gen::generate(*src.spec, k);
  auto inst = io::load_instance(*src.path);
  return k > 0 ? inst.with_k(k) : inst;
}

ResultRow run_one(const ExperimentConfig& cfg, const Job& job) {
  const auto& src = cfg.instances[job.source];
  try {
    return run_job(materialize(src, job.k), src.id, cfg);
  } catch (const std::exception& e) {
    ResultRow row;
    row.instance = src.id;
    row.k = job.k;
    row.error = e.what();
    return row;
  }
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.instance != b.instance ? a.instance < b.instance : a.k < b.k;
  });
}

}  // namespace

VerifyLevel parse_verify_level(const std::string& s) {
  if (s == "off") return VerifyLevel::kOff;
  if (s == "assert") return VerifyLevel::kAssert;
  if (s == "full" || s == "full-dual-enumeration") return VerifyLevel::kFull;
  throw Error("unknown verify level '" + s + "'");
}

std::string to_string(VerifyLevel v) {
  switch (v) {
    case VerifyLevel::kOff: return "off";
    case VerifyLevel::kAssert: return "assert";
    case VerifyLevel::kFull: return "full";
  }
  return "?";
}

std::string instance_id(const gen::GenSpec& spec) {
  std::ostringstream os;
  os << gen::to_string(spec.kind) << "-n" << spec.n << "-c" << spec.num_colors << "-s" << spec.seed;
  if (spec.kind == gen::Kind::kZipf && spec.zipf_alpha != 1.0) os << "-a" << spec.zipf_alpha;
  if (spec.kind == gen::Kind::kBursty && (spec.burst_min != 1 || spec.burst_max != 8))
    os << "-b" << spec.burst_min << "_" << spec.burst_max;
  return os.str();
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::vector<gen::Kind> families;
  std::vector<std::int64_t> ns, colors, seeds{1};
  double alpha = 1.0;
  std::pair<std::int64_t, std::int64_t> burst{1, 8};
  std::vector<std::string> files;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    if (key == "families") {
      for (const auto& f : split_list(val)) families.push_back(gen::parse_kind(f));
    } else if (key == "n") {
      ns = int_list(key, val);
    } else if (key == "colors") {
      colors = int_list(key, val);
    } else if (key == "instance_seeds") {
      seeds = int_list(key, val);
    } else if (key == "instance_file") {
      files.push_back(val);
    } else if (key == "k") {
      cfg.ks = int_list(key, val);
    } else if (key == "k_prime") {
      cfg.k_prime_override = to_int(key, val);
    } else if (key == "rounding_seeds") {
      cfg.rounding_seeds = to_int(key, val);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(to_int(key, val));
    } else if (key == "delta") {
      cfg.delta = to_real(key, val);
    } else if (key == "mode") {
      if (val == "auto") cfg.mode.reset();
      else cfg.mode = pd::parse_candidate_mode(val);
    } else if (key == "verify") {
      cfg.verify = parse_verify_level(val);
    } else if (key == "oracle") {
      cfg.oracle = to_switch(key, val);
    } else if (key == "augmented") {
      cfg.augmented = to_switch(key, val);
    } else if (key == "timing") {
      cfg.timing = to_switch(key, val);
    } else if (key == "zipf_alpha") {
      alpha = to_real(key, val);
    } else if (key == "burst") {
      burst = to_range(key, val);
    } else if (key == "csv") {
      cfg.csv_path = val;
    } else if (key == "svg") {
      cfg.svg_path = val;
    } else {
      throw Error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (!families.empty()) {
    if (ns.empty() || colors.empty()) throw Error("config: families need n and colors");
    for (auto f : families)
      for (auto n : ns)
        for (auto c : colors)
          for (auto s : seeds) {
            gen::GenSpec g;
            g.kind = f;
            g.n = n;
            g.num_colors = c;
            g.seed = static_cast<std::uint64_t>(s);
            g.zipf_alpha = alpha;
            g.burst_min = burst.first;
            g.burst_max = burst.second;
            cfg.instances.push_back({instance_id(g), std::nullopt, g});
          }
  }
  for (const auto& f : files) cfg.instances.push_back({f, f, std::nullopt});
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  return parse_config(in);
}

ExperimentConfig default_suite() {
  std::istringstream in(
      "families = round_robin, uniform, zipf, bursty\n"
      "n = 50, 100, 200\n"
      "colors = 2, 5\n"
      "instance_seeds = 1-2\n"
      "k = 12, 16, 32, 64\n"
      "rounding_seeds = 10\n"
      "verify = full\n");
  return parse_config(in);
}

double scale_envelope(std::int64_t k) {
  return 25.0 * (1.0 + std::log(std::log(static_cast<double>(k))));
}

ResultRow run_job(const Instance& inst, const std::string& id, const ExperimentConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  ResultRow row;
  row.instance = id;
  row.k = inst.k();
  row.n = inst.n();
  row.colors = inst.num_colors();
  row.k_prime = cfg.k_prime_override ? *cfg.k_prime_override : pd::derive_k_prime(inst.k());
  const bool checking = cfg.verify != VerifyLevel::kOff;

  auto ec = pd::default_config(inst.k(), inst.n());
  ec.k_prime = row.k_prime;
  if (cfg.mode) ec.mode = *cfg.mode;
  ec.strict = false;
  ec.record_trace = false;
  const auto res = pd::run(inst, ec);

  row.frac_obj = res.x.objective();
  row.dual_obj = res.duals.objective();
  row.scale = res.duals.scale;
  row.scaled_dual_obj = std::isfinite(row.scale) ? row.dual_obj / row.scale : kNaN;
  row.frac_dual_ratio = std::isfinite(row.scale) && row.dual_obj > 0.0
                            ? row.frac_obj * row.scale / row.dual_obj
                            : kNaN;
  const Instance inst_kp = inst.with_k(row.k_prime);
  if (checking) {
    const auto lp = check_lp_feasibility(res.x, inst);
    if (!lp.feasible) row.lp_violations = std::max<std::int64_t>(1, static_cast<std::int64_t>(lp.violations.size()));
    row.invariant_failures = res.diag.invariant_failures();
    if (std::isfinite(row.scale) && row.scale > scale_envelope(inst.k())) ++row.dual_violations;
    if (cfg.verify == VerifyLevel::kFull && inst.n() <= kDefaultEnumCap && std::isfinite(row.scale) &&
        !dual_feasible(res.duals.scaled_dual(), inst_kp))
      ++row.dual_violations;
  }

  round::RoundingConfig rc;
  rc.delta = cfg.delta;
  rc.rng_seed = cfg.seed;
  const round::FractionalStream stream(inst, res.x);
  const auto outcomes = round::round_seeds(inst, stream, rc, cfg.rounding_seeds);
  if (!outcomes.empty()) {
    double sum = 0.0;
    row.round_min = std::numeric_limits<std::int64_t>::max();
    for (const auto& o : outcomes) {
      sum += static_cast<double>(o.cost);
      row.round_min = std::min(row.round_min, o.cost);
      row.round_max = std::max(row.round_max, o.cost);
      if (checking && !o.valid) ++row.schedule_violations;
    }
    row.round_mean = sum / static_cast<double>(outcomes.size());
    row.round_frac_ratio = row.frac_obj > 0.0 ? row.round_mean / row.frac_obj : kNaN;
  } else {
    row.round_mean = kNaN;
    row.round_frac_ratio = kNaN;
  }

  const oracle::OptGuard guard;
  if (cfg.oracle && inst.n() <= guard.max_n && inst.num_colors() <= guard.max_colors) {
    const auto opt = oracle::opt_schedule(inst, guard);
    row.opt = opt.cost;
    row.opt_k_prime = oracle::opt_schedule(inst_kp, guard).cost;
    if (opt.cost > 0 && !outcomes.empty())
      row.round_opt_ratio = row.round_mean / static_cast<double>(opt.cost);
    if (checking) {
      if (!outcomes.empty() && row.round_min < opt.cost) ++row.bound_violations;
      if (*row.opt_k_prime < opt.cost) ++row.bound_violations;
      if (std::isfinite(row.scaled_dual_obj) && row.scaled_dual_obj > static_cast<double>(*row.opt_k_prime) + 1e-6)
        ++row.bound_violations;
    }
    if (cfg.augmented) {
      const auto aug = oracle::run_augmented(inst, inst.k(), row.k_prime, opt.schedule);
      row.aug_cost = count_runs(aug.schedule.output, inst);
      if (checking) {
        if (!check_schedule(aug.schedule, inst_kp).valid) ++row.schedule_violations;
        if (aug.trace.max_p >= inst.k() - row.k_prime) ++row.bound_violations;
        if (static_cast<double>(*row.aug_cost) >
            oracle::augmented_cost_bound(inst.k(), row.k_prime) * static_cast<double>(opt.cost) + 1e-9)
          ++row.bound_violations;
      }
    }
  }
  if (cfg.timing)
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
  return row;
}

std::vector<ResultRow> run_experiment_serial(const ExperimentConfig& cfg) {
  const auto jobs = jobs_of(cfg);
  std::vector<ResultRow> rows;
  for (const auto& job : jobs) rows.push_back(run_one(cfg, job));
  sort_rows(rows);
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  const auto jobs = jobs_of(cfg);
  std::vector<ResultRow> rows(jobs.size());
  const auto count = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t q = 0; q < count; ++q)
    rows[static_cast<std::size_t>(q)] = run_one(cfg, jobs[static_cast<std::size_t>(q)]);
  sort_rows(rows);
  return rows;
}

std::int64_t total_violations(const std::vector<ResultRow>& rows) {
  std::int64_t sum = 0;
  for (const auto& r : rows) sum += r.violations();
  return sum;
}

std::string csv_header() {
  return std::string("# ") + kCsvVersion +
         "\ninstance,k,k_prime,n,colors,frac_obj,dual_obj,scale,scaled_dual_obj,frac_dual_ratio,"
         "round_mean,round_min,round_max,round_frac_ratio,opt,round_opt_ratio,opt_k_prime,aug_cost,"
         "invariant_failures,lp_violations,schedule_violations,dual_violations,bound_violations,"
         "runtime_ms,status\n";
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << csv_header();
  for (const auto& r : rows) {
    out << r.instance << ',' << r.k << ',' << r.k_prime << ',' << r.n << ',' << r.colors << ','
        << fmt(r.frac_obj) << ',' << fmt(r.dual_obj) << ',' << fmt(r.scale) << ',' << fmt(r.scaled_dual_obj)
        << ',' << fmt(r.frac_dual_ratio) << ',' << fmt(r.round_mean) << ',' << r.round_min << ','
        << r.round_max << ',' << fmt(r.round_frac_ratio) << ',' << fmt_opt(r.opt) << ','
        << fmt_opt(r.round_opt_ratio) << ',' << fmt_opt(r.opt_k_prime) << ',' << fmt_opt(r.aug_cost) << ','
        << r.invariant_failures << ',' << r.lp_violations << ',' << r.schedule_violations << ','
        << r.dual_violations << ',' << r.bound_violations << ','
        << (r.runtime_ms ? fmt(*r.runtime_ms) : std::string("-")) << ','
        << (r.error.empty() ? "ok" : "error") << '\n';
  }
}

void write_svg(std::ostream& out, const std::vector<ResultRow>& rows) {
  struct Series {
    const char* name;
    const char* stroke;
    std::map<std::int64_t, std::pair<double, int>> acc;
  };
  Series series[] = {{"frac_dual_ratio", "#1f77b4", {}},
                     {"round_frac_ratio", "#d62728", {}},
                     {"round_opt_ratio", "#2ca02c", {}}};
  std::vector<std::int64_t> ks;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    ks.push_back(r.k);
    const double vals[] = {r.frac_dual_ratio, r.round_frac_ratio, r.round_opt_ratio.value_or(kNaN)};
    for (int s = 0; s < 3; ++s) {
      if (!std::isfinite(vals[s])) continue;
      auto& a = series[s].acc[r.k];
      a.first += vals[s];
      ++a.second;
    }
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  const double w = 640, h = 400, left = 60, right = 170, top = 30, bottom = 50;
  double ymax = 1.0;
  for (const auto& s : series)
    for (const auto& [k, a] : s.acc) ymax = std::max(ymax, a.first / a.second);
  ymax *= 1.1;
  auto xpos = [&](std::size_t q) {
    return ks.size() <= 1 ? left + (w - left - right) / 2
                          : left + (w - left - right) * static_cast<double>(q) / static_cast<double>(ks.size() - 1);
  };
  auto ypos = [&](double v) { return top + (h - top - bottom) * (1.0 - v / ymax); };

  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                left, top, left, h - bottom, left, h - bottom, w - right, h - bottom);
  out << buf;
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = ymax * tick / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\">%.2f</text>\n",
                  left - 6, ypos(v) + 4, v);
    out << buf;
  }
  for (std::size_t q = 0; q < ks.size(); ++q) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%lld</text>\n",
                  xpos(q), h - bottom + 18, static_cast<long long>(ks[q]));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">k</text>\n",
                left + (w - left - right) / 2, h - 12);
  out << buf;
  int legend = 0;
  for (const auto& s : series) {
    std::string pts;
    for (std::size_t q = 0; q < ks.size(); ++q) {
      const auto it = s.acc.find(ks[q]);
      if (it == s.acc.end()) continue;
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", xpos(q), ypos(it->second.first / it->second.second));
      pts += buf;
    }
    if (pts.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.stroke << "\" stroke-width=\"2\" points=\"" << pts << "\"/>\n";
    const double ly = top + 18.0 * legend++;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" stroke-width=\"2\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">%s</text>\n",
                  w - right + 12, ly, w - right + 32, ly, s.stroke, w - right + 38, ly + 4, s.name);
    out << buf;
  }
  out << "</svg>\n";
}

}  // namespace rbm::bench
