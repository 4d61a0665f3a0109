#pragma once

// Experiment runner: engine, rounding, oracle and the verification suite over
// a grid of instances and buffer sizes, reported as CSV rows and an SVG chart.
//
// Config files are flat "key = value" lines ('#' starts a comment):
//   families        round_robin, uniform, zipf, bursty, single_color (list)
//   n, colors       integer lists; the grid is families x n x colors x seeds
//   instance_seeds  integer list or a range "a-b"
//   instance_file   path to an instance file; may repeat
//   k               integer list (file instances keep their own k when empty)
//   k_prime         override for k'
//   rounding_seeds  seeds per (instance, k); seed is the first one
//   delta, mode (auto | exhaustive | pruned), verify (off | assert | full)
//   oracle, augmented, timing   on | off
//   zipf_alpha, burst ("lo-hi"), csv, svg

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rbm/core.hpp"
#include "rbm/engine.hpp"
#include "rbm/gen.hpp"

namespace rbm::bench {

enum class VerifyLevel { kOff, kAssert, kFull };
VerifyLevel parse_verify_level(const std::string& s);
std::string to_string(VerifyLevel v);

struct InstanceSource {
  std::string id;
  std::optional<std::string> path;
  std::optional<gen::GenSpec> spec;
};

std::string instance_id(const gen::GenSpec& spec);

struct ExperimentConfig {
  std::vector<InstanceSource> instances;
  std::vector<std::int64_t> ks;
  std::optional<std::int64_t> k_prime_override;
  std::int64_t rounding_seeds = 10;
  std::uint64_t seed = 1;
  double delta = 1.0 / 128.0;
  bool oracle = true;     // only where the oracle guards allow
  bool augmented = false;
  VerifyLevel verify = VerifyLevel::kAssert;
  std::optional<pd::CandidateMode> mode;
  bool timing = false;    // runtime_ms is "-" otherwise, keeping the CSV byte-stable
  std::string csv_path;
  std::string svg_path;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
// k in {12, 16, 32, 64}, n in {50, 100, 200}, 2 or 5 colors, the four mixed
// families, two instance seeds each.
ExperimentConfig default_suite();

// Upper envelope accepted for the dual scale: 25 (1 + ln ln k).
double scale_envelope(std::int64_t k);

struct ResultRow {
  std::string instance;
  std::int64_t k = 0;
  std::int64_t k_prime = 0;
  std::int64_t n = 0;
  std::int64_t colors = 0;
  double frac_obj = 0.0;
  double dual_obj = 0.0;
  double scale = 0.0;            // NaN when not computed
  double scaled_dual_obj = 0.0;
  double frac_dual_ratio = 0.0;  // frac_obj * scale / dual_obj
  double round_mean = 0.0;
  std::int64_t round_min = 0;
  std::int64_t round_max = 0;
  double round_frac_ratio = 0.0;
  std::optional<std::int64_t> opt;
  std::optional<double> round_opt_ratio;
  std::optional<std::int64_t> opt_k_prime;
  std::optional<std::int64_t> aug_cost;
  std::int64_t invariant_failures = 0;
  std::int64_t lp_violations = 0;
  std::int64_t schedule_violations = 0;
  std::int64_t dual_violations = 0;
  std::int64_t bound_violations = 0;
  std::optional<double> runtime_ms;
  std::string error;

  std::int64_t violations() const {
    return invariant_failures + lp_violations + schedule_violations + dual_violations +
           bound_violations + (error.empty() ? 0 : 1);
  }
};

ResultRow run_job(const Instance& inst, const std::string& id, const ExperimentConfig& cfg);

// Jobs are (instance, k) pairs; rows come back sorted by (instance, k). The
// OpenMP runner spreads jobs across threads, the serial one is the reference.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);
std::vector<ResultRow> run_experiment_serial(const ExperimentConfig& cfg);

std::int64_t total_violations(const std::vector<ResultRow>& rows);

inline constexpr const char* kCsvVersion = "rbm-bench-v1";
// "# rbm-bench-v1" followed by the column line.
std::string csv_header();
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
// Mean of each ratio column against k, one polyline per ratio.
void write_svg(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace rbm::bench
