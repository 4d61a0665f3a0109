#pragma once

// Randomized online rounding of a fractional LP_k solution into an RBM
// schedule. Works in phases: each phase picks one or more color blocks from
// the buffer using only the fractional prefix up to the phase start slot t0,
// evicts them, and moves t0 forward by the number of items emitted.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbm/core.hpp"
#include "rbm/rng.hpp"

namespace rbm::round {

class RoundingError : public Error {
 public:
  using Error::Error;
};

struct RoundingConfig {
  double delta = 1.0 / 128.0;
  std::uint64_t rng_seed = 0;
  bool appending = true;  // same-color arrivals join an ongoing eviction
};

// Fractional schedule flattened to (item, weight) per output slot. The
// frontier is the last slot the producer has fully written; slots at or
// before it are never touched again.
class FractionalStream {
 public:
  struct Entry {
    Item item;
    double weight;
  };

  FractionalStream(const Instance& inst, std::int64_t k);
  // Whole solution at once, frontier k+n.
  FractionalStream(const Instance& inst, const FractionalSolution& sol);

  // Adds batches and moves the frontier. Batches may not place weight on a
  // slot at or before the previous frontier.
  void extend(std::span<const Batch> batches, Slot frontier);

  std::int64_t k() const { return k_; }
  Slot frontier() const { return frontier_; }
  const std::vector<Entry>& at(Slot s) const;

 private:
  const Instance* inst_;
  std::int64_t k_;
  Slot frontier_;
  std::vector<std::vector<Entry>> slots_;  // index s-k-1
  std::vector<Entry> none_;
};

struct Lock {
  std::int64_t id = 0;
  Color owner = 0;
  std::int64_t phase = 0;
  std::vector<Item> members;  // owner block at choice time
  std::vector<FractionalStream::Entry> entries;
};

struct ClassEntry {
  Color color;
  double w;
};

struct Subclass {
  std::vector<Color> colors;
  std::vector<double> weights;
  double total() const;
};

// Greedy subclass formation within one class: colors by descending w then
// color id, each subclass collected until its total exceeds delta, repeated
// while the rest still holds at least delta. Zero-weight colors are skipped.
std::vector<Subclass> form_subclasses(std::vector<ClassEntry> entries, double delta);

// Class index of a block of `count` buffered items: count in [2^(s-1), 2^s).
int size_class(std::int64_t count);

struct EvictedBlock {
  Color color;
  std::int64_t count;
};

struct PhaseRecord {
  std::int64_t phase = 0;
  Slot t0 = 0;
  int case_fired = 0;
  nlohmann::json draws = nlohmann::json::array();
  std::vector<EvictedBlock> evicted;
  std::int64_t locks_created = 0;
  std::int64_t locks_released = 0;
  std::int64_t locks_annulled = 0;
  bool cut_short = false;  // Case 4 stopped before evicting every choice
};

class Rounder {
 public:
  Rounder(const Instance& inst, const FractionalStream& stream, RoundingConfig cfg);

  bool done() const;
  // Runs one phase. Throws RoundingError if the stream frontier is behind t0.
  PhaseRecord phase();

  Slot t0() const { return t0_; }
  std::int64_t buffered(Color c) const { return static_cast<std::int64_t>(buf_[static_cast<std::size_t>(c)].size()); }
  std::vector<Item> buffer_items() const;
  std::optional<Color> last_evicted() const { return last_; }
  // Weight the fractional solution placed on item i at slots before t0.
  double removed(Item i) const;
  double locked(Item i) const;
  const std::vector<Lock>& locks() const { return locks_; }
  const IntegralSchedule& schedule() const { return out_; }

 private:
  struct Choice {
    std::vector<Color> blocks;
    std::vector<Lock> locks;
  };

  void sync();
  void admit();
  std::int64_t evict(Color c);
  std::int64_t release_scan();
  // First of Cases 1-3 whose condition holds at t0, else 4.
  int which_case() const;
  Item case1_item() const;
  Choice procedure(PhaseRecord& rec);
  std::vector<Color> ranked_blocks() const;

  const Instance& inst_;
  const FractionalStream& stream_;
  RoundingConfig cfg_;
  Rng rng_;

  Slot t0_;
  Slot synced_;
  Item next_ = 1;
  std::vector<std::deque<Item>> buf_;  // per color, arrival order
  std::vector<char> in_buf_;
  std::int64_t held_ = 0;
  std::vector<double> removed_;
  std::vector<double> locked_;
  std::vector<Lock> locks_;
  std::int64_t lock_ids_ = 0;
  std::int64_t phases_ = 0;
  std::optional<Color> last_;
  IntegralSchedule out_;
};

struct RoundingResult {
  IntegralSchedule schedule;
  std::vector<PhaseRecord> phases;
  nlohmann::json header;
};

RoundingResult round(const Instance& inst, const FractionalStream& stream, const RoundingConfig& cfg);
RoundingResult round(const Instance& inst, const FractionalSolution& frac, const RoundingConfig& cfg);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::int64_t cost = 0;
  bool valid = false;
};

// One rounding per seed in [cfg.rng_seed, cfg.rng_seed + count). The OpenMP
// kernel splits seeds across threads; both return the same vector.
std::vector<SeedOutcome> round_seeds(const Instance& inst, const FractionalStream& stream,
                                     const RoundingConfig& cfg, std::int64_t count);
std::vector<SeedOutcome> round_seeds_serial(const Instance& inst, const FractionalStream& stream,
                                            const RoundingConfig& cfg, std::int64_t count);

nlohmann::json to_json(const PhaseRecord& p, const Instance& inst);
// Header line then one line per phase.
std::vector<nlohmann::json> phase_log(const RoundingResult& r, const Instance& inst);

}  // namespace rbm::round
