#include "rbm/dual_enum.hpp"

#include <limits>
#include <tuple>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rbm {
namespace {

struct Best {
  double lhs = -std::numeric_limits<double>::infinity();
  Color color = 0;
  Item first = 0;
  Item last = 0;
  Slot start = 0;

  // Larger lhs wins; ties go to the lexicographically smallest key.
  bool better_than(const Best& o) const {
    if (lhs != o.lhs) return lhs > o.lhs;
    return std::tie(color, first, last, start) < std::tie(o.color, o.first, o.last, o.start);
  }
};

void check_inputs(const DualSolution& d, const Instance& inst, std::int64_t cap) {
  if (inst.n() > cap)
    throw Error("dual enumeration refused: n = " + std::to_string(inst.n()) + " exceeds cap " +
                std::to_string(cap));
  if (static_cast<std::int64_t>(d.y.size()) != inst.n() ||
      static_cast<std::int64_t>(d.z.size()) != inst.n())
    throw Error("dual vectors must have length n");
}

// prefix[m] = z_{kappa+1} + ... + z_{kappa+m}
std::vector<double> z_prefix(const DualSolution& d) {
  std::vector<double> p(d.z.size() + 1, 0.0);
  for (std::size_t m = 0; m < d.z.size(); ++m) p[m + 1] = p[m] + d.z[m];
  return p;
}

// All batches of color c whose first item is occ[a].
Best scan_anchor(const DualSolution& d, const Instance& inst, const std::vector<double>& zp,
                 Color c, std::size_t a) {
  const auto& occ = inst.occurrences(c);
  const std::int64_t kappa = d.kappa;
  const std::int64_t n = inst.n();
  Best best;
  double ysum = 0.0;
  // Lowest legal start: every member r must satisfy start + r >= availability.
  Slot lo = kappa + 1;
  for (std::size_t b = a; b < occ.size(); ++b) {
    const std::int64_t len = static_cast<std::int64_t>(b - a + 1);
    ysum += d.y[static_cast<std::size_t>(occ[b] - 1)];
    lo = std::max(lo, availability(occ[b], kappa) - (len - 1));
    const Slot hi = kappa + n - (len - 1);
    if (lo > hi) break;  // lo only grows and hi only shrinks with b
    for (Slot j = lo; j <= hi; ++j) {
      const std::size_t off = static_cast<std::size_t>(j - kappa - 1);
      const double lhs = ysum - (zp[off + static_cast<std::size_t>(len)] - zp[off]);
      Best cand{lhs, c, occ[a], occ[b], j};
      if (cand.better_than(best)) best = cand;
    }
  }
  return best;
}

DualViolation finish(const Best& best) {
  DualViolation out;
  if (best.lhs == -std::numeric_limits<double>::infinity()) return out;
  out.max_lhs = best.lhs;
  out.argmax = Batch{best.color, best.first, best.last, best.start, 1.0};
  return out;
}

}  // namespace

DualViolation dual_max_violation_serial(const DualSolution& d, const Instance& inst,
                                        std::int64_t cap) {
  check_inputs(d, inst, cap);
  const auto zp = z_prefix(d);
  Best best;
  for (Color c = 0; c < inst.num_colors(); ++c)
    for (std::size_t a = 0; a < inst.occurrences(c).size(); ++a) {
      const Best b = scan_anchor(d, inst, zp, c, a);
      if (b.better_than(best)) best = b;
    }
  return finish(best);
}

DualViolation dual_max_violation(const DualSolution& d, const Instance& inst, std::int64_t cap) {
  check_inputs(d, inst, cap);
  const auto zp = z_prefix(d);
  std::vector<std::pair<Color, std::size_t>> anchors;
  anchors.reserve(static_cast<std::size_t>(inst.n()));
  for (Color c = 0; c < inst.num_colors(); ++c)
    for (std::size_t a = 0; a < inst.occurrences(c).size(); ++a) anchors.emplace_back(c, a);

  const std::int64_t m = static_cast<std::int64_t>(anchors.size());
  std::vector<Best> partial(anchors.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t idx = 0; idx < m; ++idx) {
    const auto [c, a] = anchors[static_cast<std::size_t>(idx)];
    partial[static_cast<std::size_t>(idx)] = scan_anchor(d, inst, zp, c, a);
  }
  Best best;
  for (const auto& b : partial)
    if (b.better_than(best)) best = b;
  return finish(best);
}

bool dual_feasible(const DualSolution& d, const Instance& inst, double tol, std::int64_t cap) {
  return dual_max_violation(d, inst, cap).max_lhs <= 1.0 + tol;
}

int enumeration_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace rbm
