#pragma once

// Exhaustive dual-constraint enumeration. Every valid batch (color, first
// occurrence, last occurrence, start slot) on the kappa slot axis is visited
// and the largest left-hand side of the dual constraint is returned.
//
// Two kernels share one contract: a serial reference and an OpenMP kernel
// parallel over (color, first occurrence). Both break ties identically, so
// they return the same witness.

#include <cstdint>

#include "rbm/core.hpp"

namespace rbm {

inline constexpr std::int64_t kDefaultEnumCap = 500;

struct DualViolation {
  double max_lhs = 0.0;
  std::optional<Batch> argmax;  // empty when no batch exists (n == 0)
};

DualViolation dual_max_violation(const DualSolution& d, const Instance& inst,
                                 std::int64_t cap = kDefaultEnumCap);

DualViolation dual_max_violation_serial(const DualSolution& d, const Instance& inst,
                                        std::int64_t cap = kDefaultEnumCap);

bool dual_feasible(const DualSolution& d, const Instance& inst, double tol = kFeasTol,
                   std::int64_t cap = kDefaultEnumCap);

// Number of worker threads the parallel kernel would use.
int enumeration_threads();

}  // namespace rbm
