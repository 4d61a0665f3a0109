#include "rbm/rounding.hpp"

#include <algorithm>
#include <bit>
#include <exception>
#include <map>
#include <set>

namespace rbm::round {

namespace {

constexpr double kTol = 1e-12;

}  // namespace

FractionalStream::FractionalStream(const Instance& inst, std::int64_t k)
    : inst_(&inst), k_(k), frontier_(k), slots_(static_cast<std::size_t>(inst.n())) {}

FractionalStream::FractionalStream(const Instance& inst, const FractionalSolution& sol)
    : FractionalStream(inst, sol.k) {
  extend(sol.batches, k_ + inst.n());
}

void FractionalStream::extend(std::span<const Batch> batches, Slot frontier) {
  const std::int64_t n = inst_->n();
  for (const auto& b : batches) {
    if (b.weight == 0.0) continue;
    if (b.color < 0 || b.color >= inst_->num_colors() || inst_->color(b.first) != b.color ||
        inst_->color(b.last) != b.color)
      throw RoundingError("stream batch with mismatched color");
    const auto& occ = inst_->occurrences(b.color);
    const auto r0 = inst_->rank(b.first);
    const auto r1 = inst_->rank(b.last);
    for (auto r = r0; r <= r1; ++r) {
      const Slot s = b.start_slot + (r - r0);
      if (s < k_ + 1 || s > k_ + n) throw RoundingError("stream batch outside the slot axis");
      if (s <= frontier_) throw RoundingError("stream rewrites slot " + std::to_string(s));
      slots_[static_cast<std::size_t>(s - k_ - 1)].push_back({occ[static_cast<std::size_t>(r)], b.weight});
    }
  }
  frontier_ = std::max(frontier_, std::min(frontier, k_ + n));
}

const std::vector<FractionalStream::Entry>& FractionalStream::at(Slot s) const {
  if (s < k_ + 1 || s > k_ + inst_->n()) return none_;
  return slots_[static_cast<std::size_t>(s - k_ - 1)];
}

double Subclass::total() const {
  double sum = 0.0;
  for (double w : weights) sum += w;
  return sum;
}

std::vector<Subclass> form_subclasses(std::vector<ClassEntry> entries, double delta) {
  std::erase_if(entries, [](const ClassEntry& e) { return e.w <= 0.0; });
  std::sort(entries.begin(), entries.end(), [](const ClassEntry& a, const ClassEntry& b) {
    return a.w != b.w ? a.w > b.w : a.color < b.color;
  });
  double rest = 0.0;
  for (const auto& e : entries) rest += e.w;
  std::vector<Subclass> out;
  std::size_t q = 0;
  while (q < entries.size() && rest >= delta) {
    Subclass sc;
    double sum = 0.0;
    while (q < entries.size() && sum <= delta) {
      sc.colors.push_back(entries[q].color);
      sc.weights.push_back(entries[q].w);
      sum += entries[q].w;
      ++q;
    }
    rest -= sum;
    if (sum < delta) break;
    out.push_back(std::move(sc));
  }
  return out;
}

int size_class(std::int64_t count) {
  return count <= 0 ? 0 : static_cast<int>(std::bit_width(static_cast<std::uint64_t>(count)));
}

Rounder::Rounder(const Instance& inst, const FractionalStream& stream, RoundingConfig cfg)
    : inst_(inst),
      stream_(stream),
      cfg_(cfg),
      rng_(cfg.rng_seed),
      t0_(inst.k() + 1),
      synced_(inst.k() + 1),
      buf_(static_cast<std::size_t>(inst.num_colors())),
      in_buf_(static_cast<std::size_t>(inst.n()), 0),
      removed_(static_cast<std::size_t>(inst.n()), 0.0),
      locked_(static_cast<std::size_t>(inst.n()), 0.0) {
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0 / 12.0)) throw RoundingError("delta must lie in (0, 1/12]");
  if (stream.k() != inst.k()) throw RoundingError("stream buffer size differs from the instance");
  out_.k = inst.k();
  out_.output.reserve(static_cast<std::size_t>(inst.n()));
  admit();
}

bool Rounder::done() const { return static_cast<std::int64_t>(out_.output.size()) == inst_.n(); }

std::vector<Item> Rounder::buffer_items() const {
  std::vector<Item> items;
  for (const auto& q : buf_) items.insert(items.end(), q.begin(), q.end());
  std::sort(items.begin(), items.end());
  return items;
}

double Rounder::removed(Item i) const { return removed_[static_cast<std::size_t>(i - 1)]; }
double Rounder::locked(Item i) const { return locked_[static_cast<std::size_t>(i - 1)]; }

void Rounder::admit() {
  while (next_ <= inst_.n() && held_ < inst_.k()) {
    buf_[static_cast<std::size_t>(inst_.color(next_))].push_back(next_);
    in_buf_[static_cast<std::size_t>(next_ - 1)] = 1;
    ++held_;
    ++next_;
  }
}

void Rounder::sync() {
  if (!done() && stream_.frontier() < t0_)
    throw RoundingError("fractional stream ends at slot " + std::to_string(stream_.frontier()) +
                        " but the phase starts at " + std::to_string(t0_));
  for (; synced_ < t0_; ++synced_)
    for (const auto& e : stream_.at(synced_)) removed_[static_cast<std::size_t>(e.item - 1)] += e.weight;
}

std::int64_t Rounder::evict(Color c) {
  auto& q = buf_[static_cast<std::size_t>(c)];
  std::int64_t quota = cfg_.appending ? -1 : static_cast<std::int64_t>(q.size());
  std::int64_t emitted = 0;
  while (!q.empty() && quota != 0) {
    const Item i = q.front();
    q.pop_front();
    in_buf_[static_cast<std::size_t>(i - 1)] = 0;
    --held_;
    out_.output.push_back(i);
    ++emitted;
    if (quota > 0) --quota;
    admit();
  }
  if (emitted > 0) last_ = c;
  t0_ += emitted;
  return emitted;
}

std::int64_t Rounder::release_scan() {
  std::int64_t released = 0;
  std::erase_if(locks_, [&](const Lock& lk) {
    const bool drop = std::any_of(lk.members.begin(), lk.members.end(),
                                  [&](Item i) { return removed(i) > cfg_.delta; });
    if (!drop) return false;
    for (const auto& e : lk.entries) locked_[static_cast<std::size_t>(e.item - 1)] -= e.weight;
    ++released;
    return true;
  });
  return released;
}

Item Rounder::case1_item() const {
  Item best = 0;
  double best_w = -1.0;
  for (const auto& q : buf_)
    for (Item i : q) {
      const double w = removed(i);
      if (w < cfg_.delta - kTol) continue;
      if (w > best_w || (w == best_w && i < best)) {
        best = i;
        best_w = w;
      }
    }
  return best;
}

int Rounder::which_case() const {
  if (case1_item() > 0) return 1;
  double ours = 0.0, total = 0.0;
  std::map<Color, double> by_color;
  for (const auto& e : stream_.at(t0_)) {
    total += e.weight;
    if (in_buf_[static_cast<std::size_t>(e.item - 1)]) ours += e.weight;
    by_color[inst_.color(e.item)] += e.weight;
  }
  if (ours >= 2.0 * cfg_.delta - kTol) return 2;
  if (last_ && total > 0.0 && by_color[*last_] > 0.5 * total) return 3;
  return 4;
}

std::vector<Color> Rounder::ranked_blocks() const {
  std::vector<Color> colors;
  for (Color c = 0; c < inst_.num_colors(); ++c)
    if (buffered(c) > 0) colors.push_back(c);
  std::stable_sort(colors.begin(), colors.end(),
                   [&](Color a, Color b) { return buffered(a) > buffered(b); });
  return colors;
}

Rounder::Choice Rounder::procedure(PhaseRecord& rec) {
  Choice ch;
  std::map<int, std::vector<ClassEntry>> classes;
  for (Color c = 0; c < inst_.num_colors(); ++c) {
    const auto& q = buf_[static_cast<std::size_t>(c)];
    if (q.empty()) continue;
    double sum = 0.0;
    for (Item i : q) sum += std::max(0.0, removed(i) - locked(i));
    classes[size_class(static_cast<std::int64_t>(q.size()))].push_back({c, sum / static_cast<double>(q.size())});
  }
  for (auto& [s, entries] : classes) {
    for (const auto& sc : form_subclasses(entries, cfg_.delta)) {
      double u = 0.0;
      const Color pick = sc.colors[rng_.weighted(sc.weights, &u)];
      Lock lk;
      lk.id = lock_ids_++;
      lk.owner = pick;
      lk.phase = phases_;
      const auto& own = buf_[static_cast<std::size_t>(pick)];
      lk.members.assign(own.begin(), own.end());
      for (Color c : sc.colors)
        for (Item i : buf_[static_cast<std::size_t>(c)]) {
          const double free = removed(i) - locked(i);
          if (free <= 0.0) continue;
          lk.entries.push_back({i, free});
          locked_[static_cast<std::size_t>(i - 1)] += free;
        }
      nlohmann::json cols = nlohmann::json::array();
      for (Color c : sc.colors) cols.push_back(inst_.name(c));
      rec.draws.push_back({{"kind", "subclass"}, {"class", s}, {"colors", cols}, {"weight", sc.total()},
                           {"u", u}, {"color", inst_.name(pick)}});
      ch.blocks.push_back(pick);
      ch.locks.push_back(std::move(lk));
    }
  }
  const auto ranked = ranked_blocks();
  if (!ranked.empty()) ch.blocks.push_back(ranked.front());
  std::vector<Color> uniq;
  for (Color c : ch.blocks)
    if (std::find(uniq.begin(), uniq.end(), c) == uniq.end()) uniq.push_back(c);
  ch.blocks = std::move(uniq);
  return ch;
}

PhaseRecord Rounder::phase() {
  if (done()) throw RoundingError("rounding already finished");
  sync();
  PhaseRecord rec;
  rec.phase = phases_;
  rec.t0 = t0_;
  rec.locks_released = release_scan();
  rec.case_fired = which_case();

  auto take = [&](Color c) {
    const auto m = evict(c);
    if (m > 0) rec.evicted.push_back({c, m});
  };

  switch (rec.case_fired) {
    case 1:
      take(inst_.color(case1_item()));
      break;
    case 2: {
      std::vector<Color> colors;
      std::vector<double> weights;
      for (const auto& e : stream_.at(t0_)) {
        if (!in_buf_[static_cast<std::size_t>(e.item - 1)]) continue;
        colors.push_back(inst_.color(e.item));
        weights.push_back(e.weight);
      }
      double u = 0.0;
      const auto idx = rng_.weighted(weights, &u);
      rec.draws.push_back({{"kind", "slot"}, {"u", u}, {"color", inst_.name(colors[idx])}});
      take(colors[idx]);
      break;
    }
    case 3: {
      auto ch = procedure(rec);
      rec.locks_created = static_cast<std::int64_t>(ch.locks.size());
      for (auto& lk : ch.locks) locks_.push_back(std::move(lk));
      for (Color c : ch.blocks) take(c);
      break;
    }
    default: {
      const auto ranked = ranked_blocks();
      auto ch = procedure(rec);
      std::vector<Color> order(ranked.begin(), ranked.begin() + std::min<std::size_t>(2, ranked.size()));
      const std::size_t heads = order.size();
      for (Color c : ch.blocks)
        if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
      rec.locks_created = static_cast<std::int64_t>(ch.locks.size());
      for (auto& lk : ch.locks) locks_.push_back(std::move(lk));
      std::set<Color> evicted;
      for (std::size_t q = 0; q < order.size(); ++q) {
        take(order[q]);
        evicted.insert(order[q]);
        if (q >= heads || q + 1 == order.size() || done()) continue;
        sync();
        if (which_case() == 4) continue;
        rec.cut_short = true;
        std::erase_if(locks_, [&](const Lock& lk) {
          if (lk.phase != phases_ || evicted.count(lk.owner)) return false;
          for (const auto& e : lk.entries) locked_[static_cast<std::size_t>(e.item - 1)] -= e.weight;
          ++rec.locks_annulled;
          return true;
        });
        break;
      }
      break;
    }
  }
  ++phases_;
  return rec;
}

RoundingResult round(const Instance& inst, const FractionalStream& stream, const RoundingConfig& cfg) {
  Rounder r(inst, stream, cfg);
  RoundingResult res;
  res.header = {{"format_version", 1}, {"kind", "rounding_log"}, {"rng", Rng::kAlgorithm}, {"seed", cfg.rng_seed},
                {"delta", cfg.delta}, {"appending", cfg.appending}, {"k", inst.k()}, {"n", inst.n()}};
  while (!r.done()) res.phases.push_back(r.phase());
  res.schedule = r.schedule();
  return res;
}

RoundingResult round(const Instance& inst, const FractionalSolution& frac, const RoundingConfig& cfg) {
  const FractionalStream stream(inst, frac);
  return round(inst, stream, cfg);
}

namespace {

SeedOutcome one_seed(const Instance& inst, const FractionalStream& stream, RoundingConfig cfg,
                     std::uint64_t seed) {
  cfg.rng_seed = seed;
  Rounder r(inst, stream, cfg);
  while (!r.done()) r.phase();
  const auto& s = r.schedule();
  return {seed, count_runs(s.output, inst), check_schedule(s, inst).valid};
}

}  // namespace

std::vector<SeedOutcome> round_seeds_serial(const Instance& inst, const FractionalStream& stream,
                                            const RoundingConfig& cfg, std::int64_t count) {
  std::vector<SeedOutcome> out;
  for (std::int64_t q = 0; q < count; ++q)
    out.push_back(one_seed(inst, stream, cfg, cfg.rng_seed + static_cast<std::uint64_t>(q)));
  return out;
}

std::vector<SeedOutcome> round_seeds(const Instance& inst, const FractionalStream& stream,
                                     const RoundingConfig& cfg, std::int64_t count) {
  std::vector<SeedOutcome> out(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t q = 0; q < count; ++q) {
    try {
      out[static_cast<std::size_t>(q)] = one_seed(inst, stream, cfg, cfg.rng_seed + static_cast<std::uint64_t>(q));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

nlohmann::json to_json(const PhaseRecord& p, const Instance& inst) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& b : p.evicted) ev.push_back({{"color", inst.name(b.color)}, {"count", b.count}});
  return {{"phase", p.phase},
          {"t0", p.t0},
          {"case", p.case_fired},
          {"draws", p.draws},
          {"evicted", ev},
          {"locks_created", p.locks_created},
          {"locks_released", p.locks_released},
          {"locks_annulled", p.locks_annulled},
          {"cut_short", p.cut_short}};
}

std::vector<nlohmann::json> phase_log(const RoundingResult& r, const Instance& inst) {
  std::vector<nlohmann::json> lines;
  lines.push_back(r.header);
  for (const auto& p : r.phases) lines.push_back(to_json(p, inst));
  return lines;
}

}  // namespace rbm::round
