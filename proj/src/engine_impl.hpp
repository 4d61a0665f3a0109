#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbm/engine.hpp"

namespace rbm::pd {

enum class ItemState : std::uint8_t { kUnarrived, kFractional, kIntegral, kFrozen, kDone };

struct Candidate {
  std::int64_t anchor = 0;  // rank within the color
  Slot j = 0;
  std::int64_t extent = 0;  // last rank of I
  bool extent_frozen = false;
  double sigma = 0.0;
  double rate = 0.0;        // d sigma / d mu
  bool reset_done = false;
  std::int64_t f_rank = -1;
  double mu0 = -1.0;
};

struct Piece {
  Color color = 0;
  std::int64_t first = 0;  // ranks
  std::int64_t last = 0;
  Slot start = 0;
  double w = 0.0;
  PieceKind kind = PieceKind::kRegular;
  PieceStatus status = PieceStatus::kLive;
  std::int64_t parent = -1;
  ItemState state = ItemState::kFractional;
  Slot open_t = 0;
  std::int64_t front_rank = 0;
  std::int64_t max_act_end = 0;

  Slot end() const { return start + (last - first); }
  std::int64_t length() const { return last - first + 1; }
};

struct ColorState {
  std::vector<std::int64_t> members;  // ranks in B_c; active prefix then frozen
  std::size_t act = 0;
  bool integral = false;
  bool flushing = false;
  std::int64_t arrived = 0;
  std::int64_t open_piece = -1;
  std::int64_t weight1 = -1;
  double case6_acc = 0.0;
  std::vector<std::int64_t> live;
  std::vector<Candidate> cands;
  std::deque<std::int64_t> anchor_hist;
  std::deque<Slot> open_slots;
  double rate = 0.0;

  std::size_t frozen() const { return members.size() - act; }
};

struct Engine::Impl {
  Impl(const Instance& instance, EngineConfig config);

  Instance inst;
  EngineConfig cfg;
  std::int64_t k = 0, kp = 0, n = 0;
  double lnk = 1.0;
  double thr_frz = 0.0, thr_act = 0.0;
  double block_act_bound = 0.0, block_bound = 0.0;
  bool check_blocks = false, check_volume = false;

  double mu = 0.0;
  Slot t = 0;
  std::vector<double> cov;
  std::vector<ItemState> state;
  std::vector<double> usage;
  std::vector<double> y_pass, z_pass, ybar;
  std::vector<Piece> pieces;
  std::vector<ColorState> colors;
  std::vector<std::int64_t> pending;
  std::vector<Item> orphans;  // done items that lost coverage to clipping
  std::int64_t weight1 = -1;
  bool rates_dirty = true;
  bool flushed = false;

  std::vector<nlohmann::json> trace;
  Diagnostics diag;

  // mechanics
  Item item(Color c, std::int64_t r) const { return inst.occurrences(c)[static_cast<std::size_t>(r)]; }
  double& use(Slot s) { return usage[static_cast<std::size_t>(s - k - 1)]; }
  double used(Slot s) const { return s > k + n ? 1.0 : usage[static_cast<std::size_t>(s - k - 1)]; }
  double& coverage(Item i) { return cov[static_cast<std::size_t>(i - 1)]; }
  ItemState& st(Item i) { return state[static_cast<std::size_t>(i - 1)]; }
  Slot avail_kp(Item i) const { return availability(i, kp); }
  bool ended() const { return t > kp + n && weight1 < 0; }

  void emit(const char* event, nlohmann::json payload = nlohmann::json::object());
  nlohmann::json piece_json(std::int64_t p) const;

  std::int64_t new_piece(Color c, std::int64_t first, std::int64_t last, Slot start, PieceKind kind,
                         ItemState s);
  std::int64_t clip_last(Slot start, std::int64_t first, std::int64_t last);
  void add_weight(std::int64_t p, double dw);
  void try_append(std::int64_t p, bool arrival_instant);
  void arrive(Item i);
  void pass_slot();
  void end_piece(std::int64_t p);
  void record_interrupt(std::int64_t p, std::int64_t f_rank);
  void reset_scan(Color c);
  void reset_sigma(Color c);
  void suspend_all();
  void place_pending();
  void start_weight1(Color c, bool case5);
  bool remove_covered(Color c);
  // Index one past the run of consecutive ranks starting at members[from].
  static std::size_t run_stop(const ColorState& cs, std::size_t from, std::size_t to);

  void make_candidate(Color c, std::int64_t a, Slot j);
  void extend_candidates(Color c, std::int64_t r);
  void pruned_anchor(Color c, std::int64_t a);
  void pruned_slot(Color c, Slot j);
  void compute_rates();
  double max_derivative(const ColorState& cs, double h) const;
  std::int64_t ensure_open_piece(Color c);
  void check_invariants(bool regular);

  // cases
  bool case1();
  bool case2();
  bool case3();
  bool case4();
  bool flush_progress();
  bool case5();
  bool case6();
  std::int64_t cascade();
  bool advance(double max_dmu);
  void finalize_flush();
  EngineResult finish();
};

}  // namespace rbm::pd
