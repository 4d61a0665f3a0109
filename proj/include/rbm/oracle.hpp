#pragma once

// Ground truth at desk scale: exact offline optimum by memoized search, an
// independent brute-force DFS, and the resource-augmentation algorithm that
// runs a size-k' buffer against an optimal size-k schedule.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbm/core.hpp"

namespace rbm::oracle {

struct OptGuard {
  std::int64_t max_n = 24;
  Color max_colors = 6;
};

struct OptResult {
  std::int64_t cost = 0;
  IntegralSchedule schedule;
};

class GuardExceeded : public Error {
 public:
  using Error::Error;
};

OptResult opt_schedule(const Instance& inst, OptGuard guard = {});

inline constexpr std::int64_t kBruteForceMaxN = 12;
std::int64_t opt_cost_bruteforce(const Instance& inst);

// (2k + (k - k') ln k') / k'
double lemma1_factor(std::int64_t k, std::int64_t k_prime);

// 2 + (k - k')(1 + ln k') / k'
double augmented_cost_bound(std::int64_t k, std::int64_t k_prime);

struct AugmentedStep {
  std::int64_t step = 0;
  std::string fired;  // "step1" or "step2"
  std::int64_t c_f = 0;
  std::int64_t chosen = 0;
  std::int64_t evicted = 0;
  double phi_max = 0.0;
  std::map<std::int64_t, std::int64_t> p;  // nonzero counters only
};

struct AugmentedRun {
  std::int64_t k = 0;
  std::int64_t k_prime = 0;
  std::vector<std::int64_t> renamed;  // renamed color per item, index i-1
  std::int64_t renamed_colors = 0;
  std::vector<std::int64_t> p;        // final counters per renamed color
  std::vector<AugmentedStep> trace;
  std::int64_t evictions = 0;
  std::int64_t max_p = 0;
  double min_phi_before_step2 = 0.0;  // +inf when step 2 never fired
  std::int64_t step2_count = 0;
};

struct AugmentedResult {
  IntegralSchedule schedule;  // on a size-k' buffer
  AugmentedRun trace;
};

// `opt` is any valid size-k schedule; the renaming follows its runs.
AugmentedResult run_augmented(const Instance& inst, std::int64_t k, std::int64_t k_prime,
                              const IntegralSchedule& opt);

nlohmann::json to_json(const AugmentedStep& s);

}  // namespace rbm::oracle
