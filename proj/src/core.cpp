#include "rbm/core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace rbm {

Instance::Instance(std::int64_t k, const std::vector<std::string>& tokens) : k_(k) {
  std::unordered_map<std::string, Color> ids;
  colors_.reserve(tokens.size());
  for (const auto& tok : tokens) {
    auto [it, inserted] = ids.try_emplace(tok, static_cast<Color>(names_.size()));
    if (inserted) names_.push_back(tok);
    colors_.push_back(it->second);
  }
  index();
}

Instance::Instance(std::int64_t k, std::vector<Color> colors, std::vector<std::string> names)
    : k_(k), colors_(std::move(colors)), names_(std::move(names)) {
  for (Color c : colors_) {
    if (c < 0 || static_cast<std::size_t>(c) >= names_.size())
      throw Error("color id out of range");
  }
  index();
}

void Instance::index() {
  occurrences_.assign(names_.size(), {});
  ranks_.resize(colors_.size());
  for (std::size_t p = 0; p < colors_.size(); ++p) {
    auto& occ = occurrences_[static_cast<std::size_t>(colors_[p])];
    ranks_[p] = static_cast<std::int64_t>(occ.size());
    occ.push_back(static_cast<Item>(p + 1));
  }
}

std::optional<Color> Instance::find_color(std::string_view token) const {
  for (std::size_t c = 0; c < names_.size(); ++c)
    if (names_[c] == token) return static_cast<Color>(c);
  return std::nullopt;
}

Instance Instance::with_k(std::int64_t k) const {
  Instance copy = *this;
  copy.k_ = k;
  return copy;
}

std::vector<Item> Batch::items(const Instance& inst) const {
  const auto& occ = inst.occurrences(color);
  auto lo = std::lower_bound(occ.begin(), occ.end(), first);
  auto hi = std::upper_bound(occ.begin(), occ.end(), last);
  if (lo >= hi) return {};
  return {lo, hi};
}

std::int64_t Batch::size(const Instance& inst) const {
  const auto& occ = inst.occurrences(color);
  auto lo = std::lower_bound(occ.begin(), occ.end(), first);
  auto hi = std::upper_bound(occ.begin(), occ.end(), last);
  return hi > lo ? hi - lo : 0;
}

std::string to_string(BatchViolation v) {
  switch (v) {
    case BatchViolation::kColorMismatch: return "color_mismatch";
    case BatchViolation::kRunIncomplete: return "run_incomplete";
    case BatchViolation::kEmptyRange: return "empty_range";
    case BatchViolation::kAvailability: return "availability";
    case BatchViolation::kSlotRange: return "slot_range";
    case BatchViolation::kWeightRange: return "weight_range";
  }
  return "unknown";
}

BatchReport validate_batch(const Batch& b, const Instance& inst, std::int64_t kappa,
                           std::span<const Item> explicit_items) {
  BatchReport rep;
  const std::int64_t n = inst.n();
  if (b.first < 1 || b.last > n || b.first > b.last || b.color < 0 ||
      b.color >= inst.num_colors()) {
    rep.violations.push_back(BatchViolation::kEmptyRange);
    return rep;
  }
  if (inst.color(b.first) != b.color || inst.color(b.last) != b.color)
    rep.violations.push_back(BatchViolation::kColorMismatch);
  const auto run = b.items(inst);
  if (!explicit_items.empty() &&
      !std::equal(run.begin(), run.end(), explicit_items.begin(), explicit_items.end()))
    rep.violations.push_back(BatchViolation::kRunIncomplete);
  if (b.weight < -kFeasTol || b.weight > 1.0 + kFeasTol)
    rep.violations.push_back(BatchViolation::kWeightRange);
  for (std::size_t r = 0; r < run.size(); ++r) {
    if (b.start_slot + static_cast<Slot>(r) < availability(run[r], kappa)) {
      rep.violations.push_back(BatchViolation::kAvailability);
      break;
    }
  }
  const SlotAxis axis{kappa, n};
  if (run.empty() || b.start_slot < axis.first() ||
      b.start_slot + static_cast<Slot>(run.size()) - 1 > axis.last())
    rep.violations.push_back(BatchViolation::kSlotRange);
  return rep;
}

double FractionalSolution::objective() const {
  double s = 0.0;
  for (const auto& b : batches) s += b.weight;
  return s;
}

std::vector<double> FractionalSolution::coverage(const Instance& inst) const {
  std::vector<double> cov(static_cast<std::size_t>(inst.n()), 0.0);
  for (const auto& b : batches)
    for (Item i : b.items(inst)) cov[static_cast<std::size_t>(i - 1)] += b.weight;
  return cov;
}

std::vector<double> FractionalSolution::usage(const Instance& inst) const {
  const std::int64_t n = inst.n();
  std::vector<double> use(static_cast<std::size_t>(n), 0.0);
  for (const auto& b : batches) {
    const std::int64_t len = b.size(inst);
    for (std::int64_t r = 0; r < len; ++r) {
      const Slot j = b.start_slot + r;
      if (j >= k + 1 && j <= k + n) use[static_cast<std::size_t>(j - k - 1)] += b.weight;
    }
  }
  return use;
}

LpReport check_lp_feasibility(const FractionalSolution& sol, const Instance& inst, double tol) {
  if (sol.k != inst.k()) throw Error("fractional solution buffer size differs from instance");
  for (std::size_t idx = 0; idx < sol.batches.size(); ++idx) {
    const auto rep = validate_batch(sol.batches[idx], inst, inst.k());
    if (!rep.valid()) {
      std::ostringstream os;
      const auto& b = sol.batches[idx];
      os << "invalid batch #" << idx << " (first=" << b.first << ", last=" << b.last
         << ", start_slot=" << b.start_slot << "): " << to_string(rep.violations.front());
      throw Error(os.str());
    }
  }
  LpReport rep;
  if (inst.n() == 0) return rep;
  const auto cov = sol.coverage(inst);
  const auto use = sol.usage(inst);
  rep.min_coverage = *std::min_element(cov.begin(), cov.end());
  rep.max_usage = *std::max_element(use.begin(), use.end());
  for (std::size_t i = 0; i < cov.size(); ++i)
    if (cov[i] < 1.0 - tol)
      rep.violations.push_back({LpViolation::Kind::kCoverage, static_cast<std::int64_t>(i + 1),
                                cov[i]});
  for (std::size_t j = 0; j < use.size(); ++j)
    if (use[j] > 1.0 + tol)
      rep.violations.push_back({LpViolation::Kind::kUsage,
                                static_cast<std::int64_t>(j) + inst.k() + 1, use[j]});
  rep.feasible = rep.violations.empty();
  return rep;
}

double DualSolution::objective() const {
  return std::accumulate(y.begin(), y.end(), 0.0) - std::accumulate(z.begin(), z.end(), 0.0);
}

ScheduleCheck check_schedule(const IntegralSchedule& s, const Instance& inst) {
  ScheduleCheck chk;
  const std::int64_t n = inst.n();
  auto fail = [&](std::string msg) {
    chk.valid = false;
    chk.problems.push_back(std::move(msg));
  };
  if (static_cast<std::int64_t>(s.output.size()) != n) {
    fail("output length " + std::to_string(s.output.size()) + " != n " + std::to_string(n));
    return chk;
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> next_rank(static_cast<std::size_t>(inst.num_colors()), 0);
  for (std::size_t p = 0; p < s.output.size(); ++p) {
    const Item i = s.output[p];
    const Slot slot = s.k + 1 + static_cast<Slot>(p);
    if (i < 1 || i > n || seen[static_cast<std::size_t>(i - 1)]) {
      fail("slot " + std::to_string(slot) + ": not a permutation at item " + std::to_string(i));
      return chk;
    }
    seen[static_cast<std::size_t>(i - 1)] = 1;
    if (slot < availability(i, s.k))
      fail("item " + std::to_string(i) + " emitted at slot " + std::to_string(slot) +
           " before availability " + std::to_string(availability(i, s.k)));
    auto& nr = next_rank[static_cast<std::size_t>(inst.color(i))];
    if (inst.rank(i) != nr)
      fail("item " + std::to_string(i) + " breaks per-color input order");
    nr = inst.rank(i) + 1;
  }
  return chk;
}

std::int64_t count_runs(std::span<const Item> output, const Instance& inst) {
  std::int64_t runs = 0;
  Color prev = -1;
  for (Item i : output) {
    const Color c = inst.color(i);
    if (c != prev) ++runs;
    prev = c;
  }
  return runs;
}

std::int64_t schedule_cost(const IntegralSchedule& s, const Instance& inst) {
  const auto chk = check_schedule(s, inst);
  if (!chk.valid) throw Error("invalid schedule: " + chk.problems.front());
  return count_runs(s.output, inst);
}

IntegralSchedule simulate_evictions(const Instance& inst, DecisionSource& decisions) {
  const std::int64_t n = inst.n();
  const std::int64_t k = inst.k();
  IntegralSchedule out;
  out.k = k;
  out.output.reserve(static_cast<std::size_t>(n));

  std::vector<Item> buffer;  // arrival order
  std::vector<std::int64_t> counts(static_cast<std::size_t>(inst.num_colors()), 0);
  Item next = 1;
  auto admit = [&] {
    while (next <= n && static_cast<std::int64_t>(buffer.size()) < k) {
      buffer.push_back(next);
      ++counts[static_cast<std::size_t>(inst.color(next))];
      ++next;
    }
  };
  admit();
  while (!buffer.empty()) {
    const Slot slot = k + 1 + static_cast<Slot>(out.output.size());
    const Color c = decisions.choose(BufferView{slot, counts, buffer}, inst);
    if (c < 0 || c >= inst.num_colors() || counts[static_cast<std::size_t>(c)] == 0)
      throw Error("decision source chose a color absent from the buffer");
    while (counts[static_cast<std::size_t>(c)] > 0) {
      auto it = std::find_if(buffer.begin(), buffer.end(),
                             [&](Item i) { return inst.color(i) == c; });
      out.output.push_back(*it);
      buffer.erase(it);
      --counts[static_cast<std::size_t>(c)];
      admit();
    }
  }
  return out;
}

Color OldestFirst::choose(const BufferView& buffer, const Instance& inst) {
  return inst.color(buffer.items.front());
}

FractionalSolution run_packing(const Instance& inst) {
  FractionalSolution sol;
  sol.k = inst.k();
  const std::int64_t n = inst.n();
  Item start = 1;
  while (start <= n) {
    Item end = start;
    while (end + 1 <= n && inst.color(end + 1) == inst.color(start)) ++end;
    sol.batches.push_back({inst.color(start), start, end, inst.k() + start, 1.0});
    start = end + 1;
  }
  return sol;
}

FractionalSolution schedule_as_batches(const IntegralSchedule& s, const Instance& inst) {
  FractionalSolution sol;
  sol.k = s.k;
  std::size_t p = 0;
  while (p < s.output.size()) {
    std::size_t q = p;
    const Color c = inst.color(s.output[p]);
    while (q + 1 < s.output.size() && inst.color(s.output[q + 1]) == c) ++q;
    sol.batches.push_back({c, s.output[p], s.output[q], s.k + 1 + static_cast<Slot>(p), 1.0});
    p = q + 1;
  }
  return sol;
}

}  // namespace rbm
