#include "rbm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "engine_impl.hpp"
#include "rbm/dual_enum.hpp"

namespace rbm::pd {

CandidateMode parse_candidate_mode(const std::string& s) {
  if (s == "exhaustive") return CandidateMode::kExhaustive;
  if (s == "pruned") return CandidateMode::kPruned;
  throw Error("unknown candidate mode '" + s + "'");
}

std::string to_string(CandidateMode m) {
  return m == CandidateMode::kExhaustive ? "exhaustive" : "pruned";
}

std::string to_string(PieceKind k) {
  switch (k) {
    case PieceKind::kRegular: return "regular";
    case PieceKind::kCase3Flush: return "case3-flush";
    case PieceKind::kCase5Integral: return "case5-integral";
    case PieceKind::kCase6Weight1: return "case6-weight1";
    case PieceKind::kFinalFlush: return "final-flush";
  }
  return "?";
}

std::string to_string(PieceStatus s) {
  switch (s) {
    case PieceStatus::kLive: return "open";
    case PieceStatus::kEnded: return "ended";
    case PieceStatus::kInterrupted: return "interrupted";
    case PieceStatus::kSuspended: return "suspended";
    case PieceStatus::kPending: return "pending";
    case PieceStatus::kResumed: return "resumed";
  }
  return "?";
}

std::int64_t derive_k_prime(std::int64_t k) {
  if (k < 12) throw Error("engine requires k >= 12");
  const double kk = static_cast<double>(k);
  return static_cast<std::int64_t>(std::floor(kk - 2.0 * kk / std::log(kk)));
}

EngineConfig default_config(std::int64_t k, std::int64_t n) {
  EngineConfig cfg;
  cfg.k = k;
  cfg.k_prime = derive_k_prime(k);
  cfg.mode = n > 200 ? CandidateMode::kPruned : CandidateMode::kExhaustive;
  return cfg;
}

double xhat_of_sigma(double sigma_hat, double ln_k) {
  return sigma_hat < 1.0 ? sigma_hat / ln_k : std::exp(sigma_hat - 1.0) / ln_k;
}

DualSolution DualState::raw_dual() const {
  DualSolution d;
  d.kappa = k_prime;
  d.y.resize(y_hat.size());
  for (std::size_t i = 0; i < y_hat.size(); ++i) d.y[i] = y_hat[i] + y_bar[i];
  const auto n = static_cast<std::int64_t>(y_hat.size());
  d.z.assign(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t s = 0; s < n; ++s) {
    const Slot j = k_prime + 1 + s;
    if (j > k) d.z[static_cast<std::size_t>(s)] = z_hat[static_cast<std::size_t>(j - k - 1)];
  }
  return d;
}

DualSolution DualState::scaled_dual() const {
  DualSolution d = raw_dual();
  for (auto& v : d.y) v /= scale;
  for (auto& v : d.z) v /= scale;
  return d;
}

double DualState::objective() const { return raw_dual().objective(); }

nlohmann::json to_json(const DualState& d) {
  return {{"format_version", 1}, {"kind", "dual_state"}, {"k", d.k},
          {"k_prime", d.k_prime}, {"mu_final", d.mu_final}, {"scale", d.scale},
          {"objective", d.objective()}, {"y_hat", d.y_hat}, {"z_hat", d.z_hat},
          {"y_bar", d.y_bar}};
}

double compute_scale(const DualState& duals, const Instance& inst, std::int64_t cap) {
  const auto v = dual_max_violation(duals.raw_dual(), inst.with_k(duals.k_prime), cap);
  return std::max(1.0, v.max_lhs);
}

// ---------------------------------------------------------------------------

Engine::Impl::Impl(const Instance& instance, EngineConfig config)
    : inst(instance), cfg(config), k(config.k), kp(config.k_prime), n(instance.n()) {
  if (k < 12) throw Error("engine requires k >= 12");
  if (inst.k() != k) inst = inst.with_k(k);
  if (kp < 1 || kp >= k) throw Error("engine requires 1 <= k' < k");
  if (n == 0) throw Error("engine requires a nonempty instance");
  lnk = std::log(static_cast<double>(k));
  thr_frz = static_cast<double>(k) / (cfg.c_frz * lnk);
  thr_act = static_cast<double>(k) / (cfg.c_act * lnk);
  block_act_bound = 11.0 * static_cast<double>(k) / (100.0 * lnk);
  block_bound = 12.0 * static_cast<double>(k) / (100.0 * lnk);
  check_blocks = static_cast<double>(k) / (100.0 * lnk) >= 1.0;
  check_volume = k >= 64;

  const auto N = static_cast<std::size_t>(n);
  cov.assign(N, 0.0);
  state.assign(N, ItemState::kUnarrived);
  usage.assign(N, 0.0);
  y_pass.assign(N, std::numeric_limits<double>::quiet_NaN());
  z_pass.assign(N, std::numeric_limits<double>::quiet_NaN());
  ybar.assign(N, 0.0);
  colors.resize(static_cast<std::size_t>(inst.num_colors()));

  t = k + 1;
  for (Item i = 1; i <= std::min(k, n); ++i) arrive(i);
  if (cfg.mode == CandidateMode::kExhaustive) {
    for (Color c = 0; c < inst.num_colors(); ++c) {
      auto& cs = colors[static_cast<std::size_t>(c)];
      for (std::int64_t a = 0; a < cs.arrived; ++a)
        for (Slot j = avail_kp(item(c, a)); j <= t; ++j) make_candidate(c, a, j);
    }
  }
  emit("start", {{"k", k}, {"k_prime", kp}, {"n", n}, {"mode", to_string(cfg.mode)}});
}

void Engine::Impl::emit(const char* event, nlohmann::json payload) {
  if (!cfg.record_trace) return;
  nlohmann::json j = {{"mu", mu}, {"event", event}, {"t", t}};
  for (auto& [key, v] : payload.items()) j[key] = v;
  trace.push_back(std::move(j));
}

nlohmann::json Engine::Impl::piece_json(std::int64_t p) const {
  const auto& pc = pieces[static_cast<std::size_t>(p)];
  return {{"piece", p},
          {"color", inst.name(pc.color)},
          {"first", item(pc.color, pc.first)},
          {"last", item(pc.color, pc.last)},
          {"start", pc.start},
          {"weight", pc.w},
          {"kind", to_string(pc.kind)}};
}

std::int64_t Engine::Impl::clip_last(Slot start, std::int64_t first, std::int64_t last) {
  const std::int64_t room = k + n - start;
  if (last - first > room) {
    ++diag.clipped_pieces;
    if (cfg.strict && room < 0) throw EngineError("slot overflow: piece starts past slot k+n");
    return first + room;
  }
  return last;
}

std::int64_t Engine::Impl::new_piece(Color c, std::int64_t first, std::int64_t last, Slot start,
                                     PieceKind kind, ItemState s) {
  Piece p;
  p.color = c;
  p.first = first;
  p.last = clip_last(start, first, last);
  p.start = start;
  p.kind = kind;
  p.state = s;
  p.open_t = t;
  p.front_rank = first;
  p.max_act_end = p.last;
  pieces.push_back(p);
  const auto idx = static_cast<std::int64_t>(pieces.size()) - 1;
  colors[static_cast<std::size_t>(c)].live.push_back(idx);
  return idx;
}

void Engine::Impl::add_weight(std::int64_t p, double dw) {
  auto& pc = pieces[static_cast<std::size_t>(p)];
  for (std::int64_t r = pc.first; r <= pc.last; ++r) coverage(item(pc.color, r)) += dw;
  for (Slot s = pc.start; s <= pc.end(); ++s) use(s) += dw;
  pc.w += dw;
}

void Engine::Impl::try_append(std::int64_t p, bool arrival_instant) {
  auto& pc = pieces[static_cast<std::size_t>(p)];
  const auto& cs = colors[static_cast<std::size_t>(pc.color)];
  for (;;) {
    const std::int64_t r = pc.last + 1;
    if (r >= cs.arrived) return;
    const Item i = item(pc.color, r);
    if (st(i) != pc.state) return;
    const Slot e = pc.end();
    if (!(e >= t || (arrival_instant && e == t - 1))) return;
    if (e + 1 > k + n) {
      ++diag.clipped_pieces;
      return;
    }
    if (used(e + 1) + pc.w > 1.0 + kFeasTol) return;
    coverage(i) += pc.w;
    use(e + 1) += pc.w;
    ++pc.last;
    pc.max_act_end = std::max(pc.max_act_end, pc.last);
  }
}

void Engine::Impl::arrive(Item i) {
  const Color c = inst.color(i);
  auto& cs = colors[static_cast<std::size_t>(c)];
  const std::int64_t r = inst.rank(i);
  cs.arrived = r + 1;
  const bool integral_now =
      (cs.integral && cs.act > 0) ||
      (cs.weight1 >= 0 && pieces[static_cast<std::size_t>(cs.weight1)].kind == PieceKind::kCase5Integral);
  cs.members.push_back(r);
  if (integral_now) {
    st(i) = ItemState::kIntegral;
    cs.integral = true;
    cs.act = cs.members.size();
  } else {
    st(i) = ItemState::kFrozen;
  }
  for (std::size_t q = 0; q < cs.live.size(); ++q) try_append(cs.live[q], true);
  extend_candidates(c, r);
  rates_dirty = true;
}

void Engine::Impl::pass_slot() {
  if (t <= k + n) z_pass[static_cast<std::size_t>(t - k - 1)] = mu;
  ++t;
  for (auto& cs : colors) cs.open_piece = -1;
  const Item a = t - 1;
  if (a > k && a <= n) arrive(a);
  if (cfg.mode == CandidateMode::kExhaustive && t <= kp + n) {
    for (Color c = 0; c < inst.num_colors(); ++c) {
      auto& cs = colors[static_cast<std::size_t>(c)];
      for (std::int64_t anchor = 0; anchor < cs.arrived; ++anchor) make_candidate(c, anchor, t);
    }
  }
  // Anything ending before the new current slot has passed.
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    std::vector<std::int64_t> done;
    for (auto p : cs.live)
      if (pieces[static_cast<std::size_t>(p)].end() < t) done.push_back(p);
    for (auto p : done) end_piece(p);
  }
  emit("slot", {{"passed", t - 1}});
  rates_dirty = true;
}

void Engine::Impl::end_piece(std::int64_t p) {
  auto& pc = pieces[static_cast<std::size_t>(p)];
  auto& cs = colors[static_cast<std::size_t>(pc.color)];
  cs.live.erase(std::find(cs.live.begin(), cs.live.end(), p));
  if (cs.open_piece == p) cs.open_piece = -1;
  const bool w1 = pc.kind == PieceKind::kCase5Integral || pc.kind == PieceKind::kCase6Weight1;
  if (w1) {
    pc.status = PieceStatus::kEnded;
    emit("end", piece_json(p));
    if (cs.weight1 == p) cs.weight1 = -1;
    if (weight1 == p) {
      weight1 = -1;
      place_pending();
    }
    return;
  }
  const std::int64_t r = pc.last + 1;
  const bool interrupted = r < cs.arrived && st(item(pc.color, r)) == ItemState::kFrozen;
  pc.status = interrupted ? PieceStatus::kInterrupted : PieceStatus::kEnded;
  const bool regular = pc.kind == PieceKind::kRegular;
  if (regular && interrupted) record_interrupt(p, r);
  if (regular && (!cfg.case6_interrupted_only || interrupted)) cs.case6_acc += pc.w;
  emit(interrupted ? "interrupt" : "end", piece_json(p));
}

void Engine::Impl::record_interrupt(std::int64_t p, std::int64_t f_rank) {
  std::int64_t root = p;
  while (pieces[static_cast<std::size_t>(root)].parent >= 0) root = pieces[static_cast<std::size_t>(root)].parent;
  const auto& src = pieces[static_cast<std::size_t>(root)];
  auto& cs = colors[static_cast<std::size_t>(src.color)];
  ++diag.interruptions;
  for (auto& cd : cs.cands) {
    if (cd.f_rank >= 0 || cd.anchor > f_rank || cd.extent < f_rank) continue;
    if (cd.j >= src.open_t || cd.anchor > src.max_act_end) continue;
    const std::int64_t hi = std::min(cd.extent, cd.anchor + (src.open_t - cd.j) - 1);
    if (hi < std::max(cd.anchor, src.front_rank)) continue;
    cd.f_rank = f_rank;
  }
  reset_scan(src.color);
}

void Engine::Impl::reset_scan(Color c) {
  auto& cs = colors[static_cast<std::size_t>(c)];
  const auto size = static_cast<std::int64_t>(cs.members.size());
  for (auto& cd : cs.cands) {
    if (cd.f_rank < 0 || cd.reset_done) continue;
    const auto before = static_cast<std::int64_t>(
        std::lower_bound(cs.members.begin(), cs.members.end(), cd.f_rank) - cs.members.begin());
    if (!regular_reset_due(before, size)) continue;
    cd.sigma = 0.0;
    cd.reset_done = true;
    cd.mu0 = mu;
    ++diag.regular_resets;
    emit("reset", {{"color", inst.name(c)}, {"anchor", item(c, cd.anchor)}, {"j", cd.j},
                   {"f", item(c, cd.f_rank)}});
  }
}

void Engine::Impl::reset_sigma(Color c) {
  for (auto& cd : colors[static_cast<std::size_t>(c)].cands) cd.sigma = 0.0;
}

void Engine::Impl::suspend_all() {
  for (auto& cs : colors) {
    std::vector<std::int64_t> keep;
    for (auto p : cs.live) {
      auto& pc = pieces[static_cast<std::size_t>(p)];
      const bool w1 = pc.kind == PieceKind::kCase5Integral || pc.kind == PieceKind::kCase6Weight1;
      if (w1 || pc.end() < t) {
        keep.push_back(p);
        continue;
      }
      ++diag.suspensions;
      const std::int64_t cut = t - pc.start;
      for (Slot s = std::max(t, pc.start); s <= pc.end(); ++s) use(s) -= pc.w;
      if (cut <= 0) {
        pc.status = PieceStatus::kPending;
        pending.push_back(p);
        emit("suspend", piece_json(p));
        continue;
      }
      Piece rem = pc;
      rem.first = pc.first + cut;
      rem.parent = p;
      rem.status = PieceStatus::kPending;
      pc.last = pc.first + cut - 1;
      pc.status = PieceStatus::kSuspended;
      pieces.push_back(rem);
      pending.push_back(static_cast<std::int64_t>(pieces.size()) - 1);
      emit("suspend", piece_json(p));
    }
    cs.live = std::move(keep);
    cs.open_piece = -1;
  }
}

void Engine::Impl::place_pending() {
  for (auto p : pending) {
    auto& pc = pieces[static_cast<std::size_t>(p)];
    pc.start = t;
    const std::int64_t last = clip_last(t, pc.first, pc.last);
    for (std::int64_t r = last + 1; r <= pc.last; ++r) {
      const Item i = item(pc.color, r);
      coverage(i) -= pc.w;
      if (st(i) == ItemState::kDone && coverage(i) < 1.0 - cfg.event_tol) orphans.push_back(i);
    }
    pc.last = last;
    for (Slot s = pc.start; s <= pc.end(); ++s) use(s) += pc.w;
    pc.status = PieceStatus::kResumed;
    colors[static_cast<std::size_t>(pc.color)].live.push_back(p);
    emit("resume", piece_json(p));
  }
  pending.clear();
  for (auto& cs : colors)
    for (std::size_t q = 0; q < cs.live.size(); ++q) try_append(cs.live[q], false);
  rates_dirty = true;
}

void Engine::Impl::start_weight1(Color c, bool case5) {
  suspend_all();
  auto& cs = colors[static_cast<std::size_t>(c)];
  const std::size_t lo = case5 ? 0 : cs.act;
  const std::size_t hi = case5 ? cs.act : cs.members.size();
  if (case5) {
    const double yb = 1.0 / (2.0 * static_cast<double>(cs.act));
    for (std::size_t q = lo; q < hi; ++q) {
      auto& v = ybar[static_cast<std::size_t>(item(c, cs.members[q]) - 1)];
      if (v == 0.0) v = yb;
    }
  }
  std::int64_t p = -1;
  Slot start = t;
  for (std::size_t q = lo; q < hi;) {
    const std::size_t stop = run_stop(cs, q, hi);
    p = new_piece(c, cs.members[q], cs.members[stop - 1], start,
                  case5 ? PieceKind::kCase5Integral : PieceKind::kCase6Weight1,
                  case5 ? ItemState::kIntegral : ItemState::kFrozen);
    add_weight(p, 1.0);
    start = pieces[static_cast<std::size_t>(p)].end() + 1;
    q = stop;
  }
  cs.weight1 = p;
  weight1 = p;
  reset_sigma(c);
  if (!case5) cs.case6_acc = 0.0;
  ++diag.case_counts[case5 ? 5 : 6];
  auto pj = piece_json(p);
  pj["block"] = hi - lo;
  emit(case5 ? "case5" : "case6", pj);
  rates_dirty = true;
}

std::size_t Engine::Impl::run_stop(const ColorState& cs, std::size_t from, std::size_t to) {
  std::size_t q = from + 1;
  while (q < to && cs.members[q] == cs.members[q - 1] + 1) ++q;
  return q;
}

bool Engine::Impl::remove_covered(Color c) {
  auto& cs = colors[static_cast<std::size_t>(c)];
  std::vector<std::int64_t> kept;
  std::vector<Item> gone;
  std::size_t act = 0;
  for (std::size_t q = 0; q < cs.members.size(); ++q) {
    const Item i = item(c, cs.members[q]);
    if (coverage(i) >= 1.0 - cfg.event_tol) {
      st(i) = ItemState::kDone;
      auto& yp = y_pass[static_cast<std::size_t>(i - 1)];
      if (std::isnan(yp)) yp = mu;
      gone.push_back(i);
    } else {
      kept.push_back(cs.members[q]);
      if (q < cs.act) ++act;
    }
  }
  if (gone.empty()) return false;
  cs.members = std::move(kept);
  cs.act = act;
  if (cs.members.empty()) cs.integral = false;
  cs.open_piece = -1;
  emit("case1", {{"color", inst.name(c)}, {"items", gone}});
  reset_scan(c);
  rates_dirty = true;
  return true;
}

// ---------------------------------------------------------------------------
// Candidates

void Engine::Impl::make_candidate(Color c, std::int64_t a, Slot j) {
  auto& cs = colors[static_cast<std::size_t>(c)];
  if (j < avail_kp(item(c, a)) || j > kp + n || j > t) return;
  Candidate cd;
  cd.anchor = a;
  cd.j = j;
  cd.extent = a;
  for (std::int64_t r = a + 1; r < cs.arrived; ++r) {
    const Slot s = j + (r - a);
    if (s > kp + n || s < avail_kp(item(c, r))) {
      cd.extent_frozen = true;
      break;
    }
    cd.extent = r;
  }
  if (!cd.extent_frozen && j + (cd.extent - a) == kp + n) cd.extent_frozen = true;
  cs.cands.push_back(cd);
  diag.candidates_peak = std::max<std::int64_t>(diag.candidates_peak, static_cast<std::int64_t>(cs.cands.size()));
}

void Engine::Impl::extend_candidates(Color c, std::int64_t r) {
  auto& cs = colors[static_cast<std::size_t>(c)];
  const Item i = item(c, r);
  for (auto& cd : cs.cands) {
    if (cd.extent_frozen || cd.extent != r - 1) continue;
    const Slot s = cd.j + (r - cd.anchor);
    if (s <= kp + n && s >= avail_kp(i))
      cd.extent = r;
    else
      cd.extent_frozen = true;
  }
}

void Engine::Impl::pruned_anchor(Color c, std::int64_t a) {
  auto& cs = colors[static_cast<std::size_t>(c)];
  if (std::find(cs.anchor_hist.begin(), cs.anchor_hist.end(), a) != cs.anchor_hist.end()) return;
  cs.anchor_hist.push_back(a);
  if (cs.anchor_hist.size() > cfg.pruned_anchor_window) {
    const auto old = cs.anchor_hist.front();
    cs.anchor_hist.pop_front();
    std::erase_if(cs.cands, [&](const Candidate& cd) { return cd.anchor == old; });
  }
  make_candidate(c, a, avail_kp(item(c, a)));
  for (Slot j : cs.open_slots)
    if (j != avail_kp(item(c, a))) make_candidate(c, a, j);
}

void Engine::Impl::pruned_slot(Color c, Slot j) {
  auto& cs = colors[static_cast<std::size_t>(c)];
  if (std::find(cs.open_slots.begin(), cs.open_slots.end(), j) != cs.open_slots.end()) return;
  cs.open_slots.push_back(j);
  if (cs.open_slots.size() > cfg.pruned_slot_window) {
    const auto old = cs.open_slots.front();
    cs.open_slots.pop_front();
    std::erase_if(cs.cands, [&](const Candidate& cd) {
      return cd.j == old && cd.j != avail_kp(item(c, cd.anchor));
    });
  }
  for (auto a : cs.anchor_hist) {
    const bool exists = std::any_of(cs.cands.begin(), cs.cands.end(),
                                    [&](const Candidate& cd) { return cd.anchor == a && cd.j == j; });
    if (!exists) make_candidate(c, a, j);
  }
}

void Engine::Impl::compute_rates() {
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    if (cfg.mode == CandidateMode::kPruned && !cs.members.empty()) pruned_anchor(c, cs.members.front());
    std::erase_if(cs.cands, [&](const Candidate& cd) {
      return cd.extent_frozen && (cs.members.empty() || cd.extent < cs.members.front());
    });
    const auto act_end = cs.members.begin() + static_cast<std::ptrdiff_t>(cs.act);
    for (auto& cd : cs.cands) {
      cd.rate = 0.0;
      if (t <= cd.j || cs.act == 0) continue;
      const std::int64_t hi = std::min(cd.extent, cd.anchor + (t - cd.j) - 1);
      if (hi < cd.anchor) continue;
      const auto lo_it = std::lower_bound(cs.members.begin(), act_end, cd.anchor);
      const auto hi_it = std::upper_bound(lo_it, act_end, hi);
      cd.rate = static_cast<double>(hi_it - lo_it);
    }
  }
  rates_dirty = false;
}

double Engine::Impl::max_derivative(const ColorState& cs, double h) const {
  double best = 0.0;
  for (const auto& cd : cs.cands) {
    if (cd.rate <= 0.0) continue;
    const double s = cd.sigma + cd.rate * h;
    const double d = s < 1.0 ? cd.rate / lnk : cd.rate * std::exp(s - 1.0) / lnk;
    best = std::max(best, d);
  }
  return best;
}

std::int64_t Engine::Impl::ensure_open_piece(Color c) {
  auto& cs = colors[static_cast<std::size_t>(c)];
  const std::int64_t front = cs.members.front();
  const std::int64_t act_last = cs.members[run_stop(cs, 0, cs.act) - 1];
  if (cs.open_piece >= 0) {
    auto& pc = pieces[static_cast<std::size_t>(cs.open_piece)];
    if (pc.start == t && pc.first == front && pc.status == PieceStatus::kLive) {
      pc.max_act_end = std::max(pc.max_act_end, act_last);
      return cs.open_piece;
    }
  }
  const auto p = new_piece(c, front, act_last, t, PieceKind::kRegular, ItemState::kFractional);
  cs.open_piece = p;
  if (cfg.mode == CandidateMode::kPruned) pruned_slot(c, t);
  emit("open", piece_json(p));
  return p;
}

void Engine::Impl::check_invariants(bool regular) {
  for (const auto& cs : colors) {
    for (const auto& cd : cs.cands) {
      const double x = xhat_of_sigma(cd.sigma, lnk);
      if (x > diag.max_xhat) diag.max_xhat = x;
      if (x > 1.1 + 1e-9) {
        ++diag.xhat_violations;
        if (cfg.strict)
          throw EngineError("x_hat bound breached: " + std::to_string(x) + " at mu " +
                            std::to_string(mu) + ", t " + std::to_string(t));
      }
    }
    if (check_blocks && !cs.integral && cs.act > 0) {
      ++diag.block_bound_checks;
      if (static_cast<double>(cs.act) >= block_act_bound ||
          static_cast<double>(cs.members.size()) >= block_bound)
        ++diag.block_bound_violations;
    }
  }
  if (check_volume && regular && t - 1 <= n) {
    double vol = 0.0;
    std::int64_t size = 0;
    for (Color c = 0; c < inst.num_colors(); ++c) {
      const auto& cs = colors[static_cast<std::size_t>(c)];
      size += static_cast<std::int64_t>(cs.members.size());
      for (auto r : cs.members) vol += cov[static_cast<std::size_t>(item(c, r) - 1)];
    }
    ++diag.volume_claim_checks;
    if (!(vol < static_cast<double>(size - kp))) ++diag.volume_claim_violations;
  }
}

// ---------------------------------------------------------------------------
// Public facade

Engine::Engine(const Instance& inst, EngineConfig cfg) : impl_(std::make_unique<Impl>(inst, cfg)) {}
Engine::~Engine() = default;

std::int64_t Engine::cascade() { return impl_->cascade(); }
bool Engine::advance(double max_dmu) { return impl_->advance(max_dmu); }
void Engine::finalize_flush() { impl_->finalize_flush(); }
EngineResult Engine::finish() { return impl_->finish(); }
double Engine::mu() const { return impl_->mu; }
Slot Engine::t() const { return impl_->t; }
bool Engine::ended() const { return impl_->ended(); }

std::int64_t Engine::block_size(Color c) const {
  return static_cast<std::int64_t>(impl_->colors.at(static_cast<std::size_t>(c)).members.size());
}
std::int64_t Engine::active_size(Color c) const {
  return static_cast<std::int64_t>(impl_->colors.at(static_cast<std::size_t>(c)).act);
}
bool Engine::is_integral(Color c) const { return impl_->colors.at(static_cast<std::size_t>(c)).integral; }
double Engine::coverage(Item i) const { return impl_->cov.at(static_cast<std::size_t>(i - 1)); }
double Engine::y_bar(Item i) const { return impl_->ybar.at(static_cast<std::size_t>(i - 1)); }

double Engine::max_sigma_hat(Color c) const {
  double m = 0.0;
  for (const auto& cd : impl_->colors.at(static_cast<std::size_t>(c)).cands) m = std::max(m, cd.sigma);
  return m;
}

std::size_t Engine::candidate_count() const {
  std::size_t s = 0;
  for (const auto& cs : impl_->colors) s += cs.cands.size();
  return s;
}

const std::vector<nlohmann::json>& Engine::trace() const { return impl_->trace; }

EngineResult run(const Instance& inst, const EngineConfig& cfg) {
  Engine e(inst, cfg);
  e.cascade();
  while (e.advance()) e.cascade();
  e.finalize_flush();
  auto res = e.finish();
  res.duals.scale = inst.n() <= kDefaultEnumCap ? compute_scale(res.duals, inst)
                                                : std::numeric_limits<double>::quiet_NaN();
  return res;
}

}  // namespace rbm::pd
