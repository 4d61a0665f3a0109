#pragma once

// Problem model for reordering buffer management: instances, batches,
// fractional and integral solutions, and the feasibility checkers shared by
// every other part of the library.
//
// Indexing conventions used throughout:
//   * items are 1-based, 1..n, in arrival order;
//   * output slots are absolute, kappa+1..kappa+n for a buffer of size kappa;
//   * colors are dense ids 0..C-1 with the original tokens kept on Instance.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rbm {

using Color = std::int32_t;
using Item = std::int64_t;
using Slot = std::int64_t;

inline constexpr double kFeasTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Instance {
 public:
  Instance() = default;
  // Tokens are mapped to dense ids in order of first appearance.
  Instance(std::int64_t k, const std::vector<std::string>& tokens);
  Instance(std::int64_t k, std::vector<Color> colors, std::vector<std::string> names);

  std::int64_t k() const { return k_; }
  std::int64_t n() const { return static_cast<std::int64_t>(colors_.size()); }
  Color num_colors() const { return static_cast<Color>(names_.size()); }

  Color color(Item i) const { return colors_[static_cast<std::size_t>(i - 1)]; }
  const std::string& name(Color c) const { return names_[static_cast<std::size_t>(c)]; }
  std::optional<Color> find_color(std::string_view token) const;

  // 1-based item indices of color c, in input order.
  const std::vector<Item>& occurrences(Color c) const {
    return occurrences_[static_cast<std::size_t>(c)];
  }
  // Position of item i among the items of its color (0-based).
  std::int64_t rank(Item i) const { return ranks_[static_cast<std::size_t>(i - 1)]; }

  std::span<const Color> colors() const { return colors_; }
  const std::vector<std::string>& names() const { return names_; }

  Instance with_k(std::int64_t k) const;

 private:
  void index();

  std::int64_t k_ = 1;
  std::vector<Color> colors_;
  std::vector<std::string> names_;
  std::vector<std::vector<Item>> occurrences_;
  std::vector<std::int64_t> ranks_;
};

// Earliest output slot at which a size-kappa buffer can emit item i.
constexpr Slot availability(Item i, std::int64_t kappa) {
  return i + 1 > kappa + 1 ? i + 1 : kappa + 1;
}

struct SlotAxis {
  std::int64_t kappa;
  std::int64_t n;
  Slot first() const { return kappa + 1; }
  Slot last() const { return kappa + n; }
  bool contains(Slot j) const { return j >= first() && j <= last(); }
};

struct Batch {
  Color color = 0;
  Item first = 0;
  Item last = 0;
  Slot start_slot = 0;
  double weight = 0.0;

  // Every occurrence of the color between first and last, inclusive.
  std::vector<Item> items(const Instance& inst) const;
  std::int64_t size(const Instance& inst) const;
  Slot end_slot(const Instance& inst) const { return start_slot + size(inst) - 1; }
};

enum class BatchViolation {
  kColorMismatch,
  kRunIncomplete,
  kEmptyRange,
  kAvailability,
  kSlotRange,
  kWeightRange,
};

std::string to_string(BatchViolation v);

struct BatchReport {
  std::vector<BatchViolation> violations;
  bool valid() const { return violations.empty(); }
};

// `explicit_items`, when given, is checked for run completeness against the
// instance; otherwise the batch is taken to cover the full run implicitly.
BatchReport validate_batch(const Batch& b, const Instance& inst, std::int64_t kappa,
                           std::span<const Item> explicit_items = {});

struct FractionalSolution {
  std::int64_t k = 0;
  std::vector<Batch> batches;

  double objective() const;
  std::vector<double> coverage(const Instance& inst) const;        // index i-1
  std::vector<double> usage(const Instance& inst) const;           // index j-(k+1)
};

struct LpViolation {
  enum class Kind { kCoverage, kUsage } kind;
  std::int64_t index;  // item or slot
  double value;
};

struct LpReport {
  bool feasible = true;
  double min_coverage = 0.0;
  double max_usage = 0.0;
  std::vector<LpViolation> violations;
};

// Throws Error naming the first invalid batch.
LpReport check_lp_feasibility(const FractionalSolution& sol, const Instance& inst,
                              double tol = kFeasTol);

struct DualSolution {
  std::int64_t kappa = 0;
  std::vector<double> y;  // index i-1
  std::vector<double> z;  // index j-(kappa+1)

  double objective() const;
};

struct IntegralSchedule {
  std::int64_t k = 0;
  std::vector<Item> output;  // output[s] is emitted at slot k+1+s
};

struct ScheduleCheck {
  bool valid = true;
  std::vector<std::string> problems;
};

ScheduleCheck check_schedule(const IntegralSchedule& s, const Instance& inst);

// Number of maximal same-color runs. Throws Error on an invalid schedule.
std::int64_t schedule_cost(const IntegralSchedule& s, const Instance& inst);

// Run count without validation; used where validity is checked separately.
std::int64_t count_runs(std::span<const Item> output, const Instance& inst);

// RBM buffer view handed to an eviction-decision source.
struct BufferView {
  Slot next_slot;
  // Per-color buffered item counts (colors absent from the buffer have 0).
  std::span<const std::int64_t> counts;
  // Items currently buffered, in arrival order.
  std::span<const Item> items;
};

class DecisionSource {
 public:
  virtual ~DecisionSource() = default;
  virtual Color choose(const BufferView& buffer, const Instance& inst) = 0;
};

// Exact RBM dynamics: fill the buffer, ask for a color whenever a choice is
// due, emit that color (appending same-color arrivals) one item per slot.
IntegralSchedule simulate_evictions(const Instance& inst, DecisionSource& decisions);

// Evicts the color of the oldest buffered item.
class OldestFirst final : public DecisionSource {
 public:
  Color choose(const BufferView& buffer, const Instance& inst) override;
};

// One weight-1 batch per maximal input run, packed left to right.
FractionalSolution run_packing(const Instance& inst);

// Convert an integral schedule to its LP form (one weight-1 batch per run).
FractionalSolution schedule_as_batches(const IntegralSchedule& s, const Instance& inst);

}  // namespace rbm
