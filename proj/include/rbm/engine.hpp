#pragma once

// Online primal-dual engine. Builds a feasible fractional LP_k solution
// together with pseudo-duals (y_hat, z_hat) and dual-fitting penalties
// (y_bar) by an event-driven continuous process over virtual time mu.
//
// Between events every rate is constant except the exponential regime of
// x_hat, so the process is integrated in closed form between events and in
// bounded steps inside the exponential regime. Piece rates within a step use
// the step-end derivative, which never under-schedules relative to x_hat.

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbm/core.hpp"

namespace rbm::pd {

class EngineError : public Error {
 public:
  using Error::Error;
};

enum class CandidateMode { kExhaustive, kPruned };
CandidateMode parse_candidate_mode(const std::string& s);
std::string to_string(CandidateMode m);

// floor(k - 2k / ln k); requires k >= 12.
std::int64_t derive_k_prime(std::int64_t k);

struct EngineConfig {
  std::int64_t k = 16;
  std::int64_t k_prime = 4;
  double c_frz = 100.0;   // frozen-block threshold is k / (c_frz ln k)
  double c_act = 10.0;    // active-block threshold is k / (c_act ln k)
  double case6_quota = 0.1;
  bool case6_interrupted_only = false;
  double max_growth = 0.01;   // relative x_hat growth per step in the exponential regime
  double event_tol = 1e-12;   // snapping tolerance for threshold crossings
  CandidateMode mode = CandidateMode::kExhaustive;
  std::size_t pruned_anchor_window = 8;
  std::size_t pruned_slot_window = 16;
  bool strict = true;         // throw on x_hat or slot-overflow breaches
  bool record_trace = true;
  std::int64_t max_steps = 50'000'000;
};

// Defaults with k_prime derived; candidate mode pruned for n > 200.
EngineConfig default_config(std::int64_t k, std::int64_t n = 0);

// x_hat as a function of sigma_hat.
double xhat_of_sigma(double sigma_hat, double ln_k);

// Regular reset fires once fewer than half of B_c arrived before f.
constexpr bool regular_reset_due(std::int64_t before_f, std::int64_t bc_size) {
  return 2 * before_f < bc_size;
}

enum class PieceKind { kRegular, kCase3Flush, kCase5Integral, kCase6Weight1, kFinalFlush };
enum class PieceStatus { kLive, kEnded, kInterrupted, kSuspended, kPending, kResumed };
std::string to_string(PieceKind k);
std::string to_string(PieceStatus s);

struct PieceRecord {
  Color color = 0;
  Item first = 0;
  Item last = 0;
  Slot start_slot = 0;
  double weight = 0.0;
  PieceKind kind = PieceKind::kRegular;
  PieceStatus status = PieceStatus::kLive;
  std::int64_t parent = -1;
};

struct DualState {
  std::int64_t k = 0;
  std::int64_t k_prime = 0;
  double mu_final = 0.0;
  std::vector<double> y_hat;   // index i-1
  std::vector<double> z_hat;   // slots k+1..k+n, index j-k-1
  std::vector<double> y_bar;   // index i-1
  double scale = 1.0;

  // (y_hat + y_bar, z_hat) on the k' slot axis, unscaled.
  DualSolution raw_dual() const;
  // raw_dual() divided by scale.
  DualSolution scaled_dual() const;
  // sum y_hat + sum y_bar - sum_{j=k'+1}^{k'+n} z_hat
  double objective() const;
};

struct Diagnostics {
  std::int64_t steps = 0;
  std::int64_t case_counts[7] = {0, 0, 0, 0, 0, 0, 0};
  std::int64_t regular_resets = 0;
  std::int64_t interruptions = 0;
  std::int64_t suspensions = 0;
  double max_xhat = 0.0;
  std::int64_t xhat_violations = 0;
  std::int64_t block_bound_violations = 0;   // fractional |B_c| bound, checked when k/(100 ln k) >= 1
  std::int64_t block_bound_checks = 0;
  std::int64_t volume_claim_violations = 0;  // scheduled-volume claim, checked when k >= 64
  std::int64_t volume_claim_checks = 0;
  std::int64_t clipped_pieces = 0;           // pieces shortened to end by slot k+n
  std::int64_t flush_cost = 0;               // colors touched by the final flush
  std::int64_t candidates_peak = 0;

  std::int64_t invariant_failures() const {
    return xhat_violations + block_bound_violations;
  }
};

struct EngineResult {
  FractionalSolution x;
  std::vector<PieceRecord> pieces;
  DualState duals;
  std::vector<nlohmann::json> trace;
  Diagnostics diag;
};

class Engine {
 public:
  Engine(const Instance& inst, EngineConfig cfg);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Execute pending cases until none applies. Returns the number fired.
  std::int64_t cascade();
  // One regular-execution step of at most max_dmu in mu. Returns false once
  // the process has ended (t past k'+n with no weight-1 batch in flight).
  bool advance(double max_dmu = 1e300);
  // Evicts whatever is left once the process ended.
  void finalize_flush();
  EngineResult finish();

  // Inspection.
  double mu() const;
  Slot t() const;
  bool ended() const;
  std::int64_t block_size(Color c) const;          // |B_c|
  std::int64_t active_size(Color c) const;         // |B_c^act|
  bool is_integral(Color c) const;
  double coverage(Item i) const;
  double y_bar(Item i) const;
  double max_sigma_hat(Color c) const;
  std::size_t candidate_count() const;
  const std::vector<nlohmann::json>& trace() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Full run followed by the dual scale computation.
EngineResult run(const Instance& inst, const EngineConfig& cfg);

// max(1, max dual LHS of (y_hat + y_bar, z_hat) on the k' axis).
double compute_scale(const DualState& duals, const Instance& inst,
                     std::int64_t cap = 500);

nlohmann::json to_json(const DualState& d);

}  // namespace rbm::pd
