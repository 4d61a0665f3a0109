#include "rbm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace rbm::oracle {
namespace {

// Search state: next input item, per-color buffered counts. The last output
// color never matters for the transition cost: an eviction empties its
// color from the buffer, so the next choice always changes color.
struct SearchState {
  Item next = 1;
  std::vector<std::int64_t> counts;

  std::int64_t buffered() const { return std::accumulate(counts.begin(), counts.end(), 0LL); }
};

std::string memo_key(const SearchState& s) {
  std::string key;
  key.reserve(8 + s.counts.size() * 2);
  key.append(reinterpret_cast<const char*>(&s.next), sizeof(s.next));
  for (auto c : s.counts) {
    key.push_back(static_cast<char>(c & 0xff));
    key.push_back(static_cast<char>((c >> 8) & 0xff));
  }
  return key;
}

SearchState initial_state(const Instance& inst) {
  SearchState s;
  s.counts.assign(static_cast<std::size_t>(inst.num_colors()), 0);
  while (s.next <= inst.n() && s.buffered() < inst.k()) {
    ++s.counts[static_cast<std::size_t>(inst.color(s.next))];
    ++s.next;
  }
  return s;
}

SearchState evict(const Instance& inst, SearchState s, Color c) {
  auto& cnt = s.counts;
  while (cnt[static_cast<std::size_t>(c)] > 0) {
    --cnt[static_cast<std::size_t>(c)];
    if (s.next <= inst.n()) {
      ++cnt[static_cast<std::size_t>(inst.color(s.next))];
      ++s.next;
    }
  }
  return s;
}

class Scripted final : public DecisionSource {
 public:
  explicit Scripted(std::vector<Color> script) : script_(std::move(script)) {}
  Color choose(const BufferView&, const Instance&) override {
    if (pos_ >= script_.size()) throw Error("scripted decisions exhausted");
    return script_[pos_++];
  }

 private:
  std::vector<Color> script_;
  std::size_t pos_ = 0;
};

}  // namespace

OptResult opt_schedule(const Instance& inst, OptGuard guard) {
  if (inst.n() > guard.max_n || inst.num_colors() > guard.max_colors)
    throw GuardExceeded("exact optimum refused: n = " + std::to_string(inst.n()) + ", colors = " +
                        std::to_string(inst.num_colors()) + " (bounds n <= " +
                        std::to_string(guard.max_n) + ", colors <= " +
                        std::to_string(guard.max_colors) + ")");
  OptResult res;
  res.schedule.k = inst.k();
  if (inst.n() == 0) return res;

  struct Entry {
    std::int64_t cost;
    Color choice;
  };
  std::unordered_map<std::string, Entry> memo;

  std::function<std::int64_t(const SearchState&)> solve = [&](const SearchState& s) {
    if (s.buffered() == 0) return std::int64_t{0};
    const auto key = memo_key(s);
    if (auto it = memo.find(key); it != memo.end()) return it->second.cost;
    std::vector<Color> order;
    for (Color c = 0; c < inst.num_colors(); ++c)
      if (s.counts[static_cast<std::size_t>(c)] > 0) order.push_back(c);
    std::stable_sort(order.begin(), order.end(), [&](Color a, Color b) {
      return s.counts[static_cast<std::size_t>(a)] > s.counts[static_cast<std::size_t>(b)];
    });
    Entry best{std::numeric_limits<std::int64_t>::max(), -1};
    for (Color c : order) {
      const std::int64_t v = 1 + solve(evict(inst, s, c));
      if (v < best.cost) best = {v, c};
    }
    memo.emplace(key, best);
    return best.cost;
  };

  const SearchState start = initial_state(inst);
  res.cost = solve(start);

  std::vector<Color> script;
  SearchState s = start;
  while (s.buffered() > 0) {
    const Color c = memo.at(memo_key(s)).choice;
    script.push_back(c);
    s = evict(inst, s, c);
  }
  Scripted src(std::move(script));
  res.schedule = simulate_evictions(inst, src);
  return res;
}

std::int64_t opt_cost_bruteforce(const Instance& inst) {
  if (inst.n() > kBruteForceMaxN)
    throw GuardExceeded("brute force refused: n = " + std::to_string(inst.n()) + " > " +
                        std::to_string(kBruteForceMaxN));
  const std::int64_t n = inst.n();
  const std::int64_t k = inst.k();
  std::int64_t best = std::numeric_limits<std::int64_t>::max();

  // Explicit buffer contents and emitted colors; every legal eviction
  // sequence is enumerated and costed by counting runs at the leaves.
  std::function<void(std::vector<Item>, Item, std::vector<Color>)> dfs =
      [&](std::vector<Item> buffer, Item next, std::vector<Color> emitted) {
        while (next <= n && static_cast<std::int64_t>(buffer.size()) < k) buffer.push_back(next++);
        if (buffer.empty()) {
          std::int64_t runs = 0;
          for (std::size_t p = 0; p < emitted.size(); ++p)
            if (p == 0 || emitted[p] != emitted[p - 1]) ++runs;
          best = std::min(best, runs);
          return;
        }
        std::vector<Color> tried;
        for (Item i : buffer) {
          const Color c = inst.color(i);
          if (std::find(tried.begin(), tried.end(), c) != tried.end()) continue;
          tried.push_back(c);
          auto buf = buffer;
          Item nx = next;
          auto em = emitted;
          for (;;) {
            auto it = std::find_if(buf.begin(), buf.end(), [&](Item x) { return inst.color(x) == c; });
            if (it == buf.end()) break;
            em.push_back(c);
            buf.erase(it);
            if (nx <= n) buf.push_back(nx++);
          }
          dfs(std::move(buf), nx, std::move(em));
        }
      };
  dfs({}, 1, {});
  return n == 0 ? 0 : best;
}

double lemma1_factor(std::int64_t k, std::int64_t k_prime) {
  if (k_prime < 1 || k_prime >= k) throw Error("lemma1_factor requires 1 <= k' < k");
  const double kk = static_cast<double>(k);
  const double kp = static_cast<double>(k_prime);
  return (2.0 * kk + (kk - kp) * std::log(kp)) / kp;
}

double augmented_cost_bound(std::int64_t k, std::int64_t k_prime) {
  const double kk = static_cast<double>(k);
  const double kp = static_cast<double>(k_prime);
  return 2.0 + (kk - kp) * (1.0 + std::log(kp)) / kp;
}

AugmentedResult run_augmented(const Instance& inst, std::int64_t k, std::int64_t k_prime,
                              const IntegralSchedule& opt) {
  if (k_prime < 1) throw Error("run_augmented requires k' >= 1");
  const auto chk = check_schedule(opt, inst.with_k(k));
  if (!chk.valid) throw Error("run_augmented: reference schedule invalid: " + chk.problems.front());

  const std::int64_t n = inst.n();
  AugmentedResult res;
  auto& tr = res.trace;
  tr.k = k;
  tr.k_prime = k_prime;
  tr.min_phi_before_step2 = std::numeric_limits<double>::infinity();
  res.schedule.k = k_prime;

  // Colors renamed by the reference schedule's eviction order.
  tr.renamed.assign(static_cast<std::size_t>(n), 0);
  std::int64_t run = -1;
  for (std::size_t p = 0; p < opt.output.size(); ++p) {
    if (p == 0 || inst.color(opt.output[p]) != inst.color(opt.output[p - 1])) ++run;
    tr.renamed[static_cast<std::size_t>(opt.output[p] - 1)] = run;
  }
  tr.renamed_colors = run + 1;
  const auto R = static_cast<std::size_t>(tr.renamed_colors);
  auto col = [&](Item i) { return tr.renamed[static_cast<std::size_t>(i - 1)]; };
  std::vector<Item> last_occ(R, 0);
  for (Item i = 1; i <= n; ++i) last_occ[static_cast<std::size_t>(col(i))] = i;
  tr.p.assign(R, 0);

  std::deque<Item> buffer;
  Item next = 1;
  auto fill = [&](std::deque<Item>& buf, Item& nx) {
    while (nx <= n && static_cast<std::int64_t>(buf.size()) < k_prime) buf.push_back(nx++);
  };
  auto min_color = [&](const std::deque<Item>& buf) {
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    for (Item i : buf) m = std::min(m, col(i));
    return m;
  };
  // Evict color c; `limit` < 0 appends arrivals, otherwise emits exactly limit items.
  auto evict = [&](std::deque<Item>& buf, Item& nx, std::int64_t c, std::int64_t limit,
                   std::vector<Item>* out) {
    std::int64_t emitted = 0;
    for (;;) {
      if (limit >= 0 && emitted == limit) break;
      auto it = std::find_if(buf.begin(), buf.end(), [&](Item x) { return col(x) == c; });
      if (it == buf.end()) break;
      if (out) out->push_back(*it);
      buf.erase(it);
      ++emitted;
      fill(buf, nx);
    }
    return emitted;
  };
  auto step1_applies = [&](const std::deque<Item>& buf, Item nx) {
    if (buf.empty()) return false;
    const std::int64_t cf = min_color(buf);
    auto b2 = buf;
    Item n2 = nx;
    std::vector<Item> out;
    evict(b2, n2, cf, -1, &out);
    return std::find(out.begin(), out.end(), last_occ[static_cast<std::size_t>(cf)]) != out.end();
  };

  fill(buffer, next);
  while (!buffer.empty()) {
    AugmentedStep st;
    st.step = static_cast<std::int64_t>(tr.trace.size());
    const std::int64_t cf = min_color(buffer);
    st.c_f = cf;
    if (step1_applies(buffer, next)) {
      st.fired = "step1";
      st.chosen = cf;
      st.evicted = evict(buffer, next, cf, -1, &res.schedule.output);
    } else {
      std::vector<std::int64_t> count(R, 0);
      for (Item i : buffer) ++count[static_cast<std::size_t>(col(i))];
      std::int64_t best_c = -1;
      double best_phi = -1.0;
      for (std::size_t c = static_cast<std::size_t>(cf); c < R; ++c) {
        if (count[c] == 0) continue;
        const double phi = static_cast<double>(static_cast<std::int64_t>(c) - cf + 1) *
                           static_cast<double>(count[c]);
        if (phi > best_phi) {
          best_phi = phi;
          best_c = static_cast<std::int64_t>(c);
        }
      }
      st.fired = "step2";
      st.chosen = best_c;
      st.phi_max = best_phi;
      tr.min_phi_before_step2 = std::min(tr.min_phi_before_step2, best_phi);
      ++tr.step2_count;
      const std::int64_t nc = count[static_cast<std::size_t>(best_c)];
      st.evicted = evict(buffer, next, best_c, nc, &res.schedule.output);
      if (!step1_applies(buffer, next)) {
        for (std::int64_t i = cf; i < best_c; ++i) {
          tr.p[static_cast<std::size_t>(i)] += nc;
          tr.max_p = std::max(tr.max_p, tr.p[static_cast<std::size_t>(i)]);
        }
      }
    }
    for (std::size_t c = 0; c < R; ++c)
      if (tr.p[c] != 0) st.p[static_cast<std::int64_t>(c)] = tr.p[c];
    ++tr.evictions;
    tr.trace.push_back(std::move(st));
  }
  return res;
}

nlohmann::json to_json(const AugmentedStep& s) {
  nlohmann::json p = nlohmann::json::object();
  for (const auto& [c, v] : s.p) p[std::to_string(c)] = v;
  return {{"step", s.step}, {"fired", s.fired}, {"c_f", s.c_f},       {"chosen", s.chosen},
          {"evicted", s.evicted}, {"phi_max", s.phi_max}, {"p", std::move(p)}};
}

}  // namespace rbm::oracle
