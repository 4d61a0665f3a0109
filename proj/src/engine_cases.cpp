#include <algorithm>
#include <cmath>
#include <limits>

#include "engine_impl.hpp"

namespace rbm::pd {

bool Engine::Impl::case1() {
  bool fired = false;
  for (Color c = 0; c < inst.num_colors(); ++c)
    if (remove_covered(c)) fired = true;
  if (fired) ++diag.case_counts[1];
  return fired;
}

bool Engine::Impl::case2() {
  if (t > k + n || used(t) < 1.0 - cfg.event_tol) return false;
  ++diag.case_counts[2];
  pass_slot();
  return true;
}

// Flush mode ends once the active block is gone; the frozen block then turns
// integral.
bool Engine::Impl::case3() {
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    if (cs.flushing && cs.act == 0) {
      cs.flushing = false;
      cs.open_piece = -1;
      if (!cs.members.empty()) {
        for (auto r : cs.members) st(item(c, r)) = ItemState::kIntegral;
        cs.act = cs.members.size();
        cs.integral = true;
      }
      reset_sigma(c);
      emit("case3_done", {{"color", inst.name(c)}, {"block", cs.members.size()}});
      rates_dirty = true;
      return true;
    }
    if (cs.flushing || cs.integral) continue;
    if (static_cast<double>(cs.frozen()) <= thr_frz) continue;
    cs.flushing = true;
    cs.open_piece = -1;
    ++diag.case_counts[3];
    emit("case3", {{"color", inst.name(c)}, {"active", cs.act}, {"frozen", cs.frozen()}});
    return true;
  }
  return false;
}

bool Engine::Impl::case4() {
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    if (cs.flushing || cs.integral || cs.frozen() == 0) continue;
    if (static_cast<double>(cs.act) >= thr_act) continue;
    for (std::size_t q = cs.act; q < cs.members.size(); ++q)
      st(item(c, cs.members[q])) = ItemState::kFractional;
    const auto moved = cs.frozen();
    cs.act = cs.members.size();
    for (std::size_t q = 0; q < cs.live.size(); ++q) try_append(cs.live[q], false);
    ++diag.case_counts[4];
    emit("case4", {{"color", inst.name(c)}, {"defrosted", moved}});
    rates_dirty = true;
    return true;
  }
  return false;
}

bool Engine::Impl::flush_progress() {
  if (t > k + n) return false;
  const double room = 1.0 - used(t);
  if (room <= cfg.event_tol) return false;
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    if (!cs.flushing || cs.act == 0) continue;
    const std::int64_t front = cs.members.front();
    std::int64_t p = cs.open_piece;
    if (p < 0 || pieces[static_cast<std::size_t>(p)].start != t ||
        pieces[static_cast<std::size_t>(p)].first != front ||
        pieces[static_cast<std::size_t>(p)].kind != PieceKind::kCase3Flush) {
      p = new_piece(c, front, cs.members[run_stop(cs, 0, cs.act) - 1], t, PieceKind::kCase3Flush, ItemState::kFractional);
      cs.open_piece = p;
    }
    const Item f = item(c, front);
    double dw = std::min(1.0 - coverage(f), room);
    const auto& pc = pieces[static_cast<std::size_t>(p)];
    for (Slot s = pc.start; s <= pc.end(); ++s) dw = std::min(dw, 1.0 - used(s));
    if (dw <= 0.0) return false;
    add_weight(p, dw);
    if (1.0 - coverage(f) < cfg.event_tol) coverage(f) = std::max(coverage(f), 1.0);
    rates_dirty = true;
    return true;
  }
  return false;
}

bool Engine::Impl::case5() {
  if (weight1 >= 0 || t > k + n || used(t) >= 1.0 - cfg.event_tol) return false;
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    if (!cs.integral || cs.act == 0) continue;
    const bool hit = std::any_of(cs.cands.begin(), cs.cands.end(),
                                 [&](const Candidate& cd) { return cd.sigma >= 1.0 - cfg.event_tol; });
    if (!hit) continue;
    start_weight1(c, true);
    return true;
  }
  return false;
}

bool Engine::Impl::case6() {
  if (weight1 >= 0 || t > k + n || used(t) >= 1.0 - cfg.event_tol) return false;
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    if (cs.flushing || cs.integral || cs.frozen() == 0) continue;
    if (cs.case6_acc < cfg.case6_quota) continue;
    start_weight1(c, false);
    return true;
  }
  return false;
}

std::int64_t Engine::Impl::cascade() {
  std::int64_t fired = 0;
  for (;;) {
    if (ended()) break;
    if (case1() || case2() || case3() || case4() || flush_progress() || case5() || case6()) {
      ++fired;
      continue;
    }
    break;
  }
  if (fired > 0) check_invariants(false);
  return fired;
}

bool Engine::Impl::advance(double max_dmu) {
  if (ended()) return false;
  if (rates_dirty) compute_rates();

  double h = max_dmu;
  bool rising = false;
  for (const auto& cs : colors) {
    const bool frac = !cs.integral && cs.act > 0;
    for (const auto& cd : cs.cands) {
      if (cd.rate <= 0.0) continue;
      if (cs.integral) {
        rising = true;
        h = std::min(h, std::max(0.0, 1.0 - cd.sigma) / cd.rate);
      } else if (frac) {
        rising = true;
        h = std::min(h, cd.sigma < 1.0 ? (1.0 - cd.sigma) / cd.rate
                                         : std::log1p(cfg.max_growth) / cd.rate);
      }
    }
  }
  if (!rising)
    throw EngineError("stall: nothing rises at mu " + std::to_string(mu) + ", t " + std::to_string(t) +
                      " with k'+n = " + std::to_string(kp + n));

  // Piece rates are the step-end derivative, then the step shrinks to the
  // first coverage or slot saturation.
  double total = 0.0;
  for (auto& cs : colors) {
    cs.rate = (!cs.integral && cs.act > 0) ? max_derivative(cs, h) : 0.0;
    total += cs.rate;
  }
  const double step_cap = h;
  for (Color c = 0; c < inst.num_colors(); ++c) {
    const auto& cs = colors[static_cast<std::size_t>(c)];
    if (cs.rate <= 0.0) continue;
    const double need = 1.0 - cov[static_cast<std::size_t>(item(c, cs.members.front()) - 1)];
    h = std::min(h, need / cs.rate);
  }
  if (total > 0.0) h = std::min(h, (1.0 - used(t)) / total);
  h = std::max(h, 0.0);

  mu += h;
  for (auto& cs : colors)
    for (auto& cd : cs.cands) {
      if (cd.rate <= 0.0) continue;
      cd.sigma += cd.rate * h;
      if (h == step_cap && std::fabs(cd.sigma - 1.0) < 1e-12) cd.sigma = 1.0;
    }
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    if (cs.rate <= 0.0) continue;
    const auto p = ensure_open_piece(c);
    add_weight(p, cs.rate * h);
    const Item f = item(c, cs.members.front());
    if (1.0 - coverage(f) < cfg.event_tol) coverage(f) = std::max(coverage(f), 1.0);
  }
  if (t <= k + n && 1.0 - used(t) < cfg.event_tol) use(t) = std::max(use(t), 1.0);
  ++diag.steps;
  if (diag.steps > cfg.max_steps) throw EngineError("step budget exhausted");
  check_invariants(true);
  return true;
}

void Engine::Impl::finalize_flush() {
  if (flushed) return;
  flushed = true;
  for (Item i : orphans) {
    if (coverage(i) >= 1.0 - cfg.event_tol) continue;
    auto& cs = colors[static_cast<std::size_t>(inst.color(i))];
    const auto r = inst.rank(i);
    const auto it = std::lower_bound(cs.members.begin(), cs.members.end(), r);
    if (it != cs.members.end() && *it == r) continue;
    cs.members.insert(it, r);
    cs.act = cs.members.size();
  }
  for (Color c = 0; c < inst.num_colors(); ++c) {
    auto& cs = colors[static_cast<std::size_t>(c)];
    if (cs.members.empty()) continue;
    ++diag.flush_cost;
    // Water-filling over runs of consecutive uncovered ranks: each piece
    // takes the smallest need in its run, so no capacity is spent on
    // items that are already covered.
    while (!cs.members.empty()) {
      if (t > k + n) {
        double worst = 0.0;
        for (auto r : cs.members) worst = std::max(worst, 1.0 - coverage(item(c, r)));
        if (worst > 0.5 * kFeasTol) {
          if (cfg.strict) throw EngineError("final flush overflows slot k+n");
          ++diag.clipped_pieces;
        }
        cs.members.clear();
        cs.act = 0;
        break;
      }
      if (used(t) >= 1.0 - cfg.event_tol) {
        z_pass[static_cast<std::size_t>(t - k - 1)] = mu;
        ++t;
        continue;
      }
      std::size_t q = 1;
      while (q < cs.members.size() && cs.members[q] == cs.members[q - 1] + 1 &&
             t + static_cast<Slot>(q) <= k + n)
        ++q;
      double dw = 1.0 - used(t);
      for (std::size_t r = 0; r < q; ++r) dw = std::min(dw, 1.0 - coverage(item(c, cs.members[r])));
      const auto p = new_piece(c, cs.members.front(), cs.members[q - 1], t, PieceKind::kFinalFlush,
                               ItemState::kFractional);
      add_weight(p, dw);
      if (1.0 - used(t) < cfg.event_tol) use(t) = std::max(use(t), 1.0);
      remove_covered(c);
    }
    emit("flush", {{"color", inst.name(c)}});
  }
}

EngineResult Engine::Impl::finish() {
  if (!flushed) finalize_flush();
  EngineResult res;
  res.x.k = k;
  for (std::size_t q = 0; q < pieces.size(); ++q) {
    const auto& pc = pieces[q];
    if (pc.status == PieceStatus::kPending) throw EngineError("pending piece never resumed");
    PieceRecord rec{pc.color, item(pc.color, pc.first), item(pc.color, pc.last), pc.start, pc.w,
                    pc.kind, pc.status, pc.parent};
    res.pieces.push_back(rec);
    if (pc.w > 0.0) res.x.batches.push_back({rec.color, rec.first, rec.last, rec.start_slot, rec.weight});
  }
  auto& d = res.duals;
  d.k = k;
  d.k_prime = kp;
  d.mu_final = mu;
  d.y_hat = y_pass;
  for (auto& v : d.y_hat)
    if (std::isnan(v)) v = mu;
  d.z_hat = z_pass;
  for (auto& v : d.z_hat)
    if (std::isnan(v)) v = mu;
  d.y_bar = ybar;
  res.trace = trace;
  res.diag = diag;
  return res;
}

}  // namespace rbm::pd
