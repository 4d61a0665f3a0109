#include <gtest/gtest.h>

#include "rbm/core.hpp"

using namespace rbm;

namespace {

Instance make(std::int64_t k, const std::string& seq) {
  std::vector<std::string> tokens;
  for (char ch : seq) tokens.emplace_back(1, ch);
  return Instance(k, tokens);
}

IntegralSchedule order(std::int64_t k, std::vector<Item> out) { return {k, std::move(out)}; }

}  // namespace

TEST(Instance, DenseIdsInFirstAppearanceOrder) {
  const auto inst = make(2, "bab");
  EXPECT_EQ(inst.num_colors(), 2);
  EXPECT_EQ(inst.name(0), "b");
  EXPECT_EQ(inst.color(2), 1);
  EXPECT_EQ(inst.occurrences(0), (std::vector<Item>{1, 3}));
  EXPECT_EQ(inst.rank(3), 1);
  EXPECT_EQ(inst.find_color("a"), 1);
  EXPECT_FALSE(inst.find_color("z"));
}

TEST(Instance, WithKKeepsSequence) {
  const auto inst = make(2, "abc").with_k(5);
  EXPECT_EQ(inst.k(), 5);
  EXPECT_EQ(inst.n(), 3);
}

TEST(Availability, Examples) {
  EXPECT_EQ(availability(1, 3), 4);
  EXPECT_EQ(availability(5, 3), 6);
  EXPECT_EQ(availability(3, 8), 9);
}

TEST(ValidateBatch, WholeSingleColorRun) {
  const auto inst = make(3, "aaa");
  EXPECT_TRUE(validate_batch({0, 1, 3, 4, 1.0}, inst, 3).valid());
}

TEST(ValidateBatch, SkippedOccurrence) {
  const auto inst = make(3, "aba");
  const Item items[] = {1, 3};
  const std::vector<Item> skipped = {1};
  const auto rep = validate_batch({0, 1, 3, 4, 1.0}, inst, 3, std::span<const Item>(skipped));
  ASSERT_FALSE(rep.valid());
  EXPECT_EQ(rep.violations.front(), BatchViolation::kRunIncomplete);
  EXPECT_TRUE(validate_batch({0, 1, 3, 4, 1.0}, inst, 3, items).valid());
}

TEST(ValidateBatch, StartsBeforeAvailability) {
  const auto inst = make(2, "aaaaa");
  // item 4 first becomes available at slot 5
  const auto rep = validate_batch({0, 4, 5, 4, 1.0}, inst, 2);
  ASSERT_FALSE(rep.valid());
  EXPECT_EQ(rep.violations.front(), BatchViolation::kAvailability);
}

TEST(ValidateBatch, RunsPastLastSlot) {
  const auto inst = make(2, "aaa");
  const auto rep = validate_batch({0, 1, 3, 4, 1.0}, inst, 2);
  ASSERT_FALSE(rep.valid());
  EXPECT_EQ(rep.violations.front(), BatchViolation::kSlotRange);
}

TEST(ValidateBatch, WeightAndColor) {
  const auto inst = make(2, "ab");
  EXPECT_EQ(validate_batch({0, 1, 1, 3, 1.5}, inst, 2).violations.front(), BatchViolation::kWeightRange);
  EXPECT_EQ(validate_batch({1, 1, 1, 3, 1.0}, inst, 2).violations.front(), BatchViolation::kColorMismatch);
}

TEST(LpFeasibility, SingleBatchCoversSingleColor) {
  const auto inst = make(3, "aaaa");
  FractionalSolution x{3, {{0, 1, 4, 4, 1.0}}};
  const auto rep = check_lp_feasibility(x, inst);
  EXPECT_TRUE(rep.feasible);
  EXPECT_DOUBLE_EQ(rep.min_coverage, 1.0);
  EXPECT_DOUBLE_EQ(x.objective(), 1.0);
}

TEST(LpFeasibility, SharedSlotAtPointSix) {
  const auto inst = make(2, "ab");
  FractionalSolution x{2, {{0, 1, 1, 3, 0.6}, {1, 2, 2, 3, 0.6}}};
  const auto rep = check_lp_feasibility(x, inst);
  EXPECT_FALSE(rep.feasible);
  bool usage = false;
  for (const auto& v : rep.violations)
    if (v.kind == LpViolation::Kind::kUsage && v.index == 3) usage = true;
  EXPECT_TRUE(usage);
  EXPECT_NEAR(rep.max_usage, 1.2, 1e-12);
}

TEST(LpFeasibility, UndercoveredItem) {
  const auto inst = make(2, "a");
  FractionalSolution x{2, {{0, 1, 1, 3, 0.9}}};
  const auto rep = check_lp_feasibility(x, inst);
  EXPECT_FALSE(rep.feasible);
  ASSERT_FALSE(rep.violations.empty());
  EXPECT_EQ(rep.violations.front().kind, LpViolation::Kind::kCoverage);
  EXPECT_EQ(rep.violations.front().index, 1);
}

TEST(LpFeasibility, InvalidBatchThrows) {
  const auto inst = make(2, "ab");
  FractionalSolution x{2, {{0, 1, 2, 3, 1.0}}};
  EXPECT_THROW(check_lp_feasibility(x, inst), Error);
}

TEST(ScheduleCost, CountsRuns) {
  const auto inst = make(5, "aabba");
  EXPECT_EQ(schedule_cost(order(5, {1, 2, 3, 4, 5}), inst), 3);
  EXPECT_EQ(schedule_cost(order(5, {1, 2, 5, 3, 4}), inst), 2);
}

TEST(ScheduleCost, EmptyAndSingleColor) {
  const auto empty = make(3, "");
  EXPECT_EQ(schedule_cost(order(3, {}), empty), 0);
  const auto single = make(2, "aaaaa");
  EXPECT_EQ(schedule_cost(order(2, {1, 2, 3, 4, 5}), single), 1);
}

TEST(CheckSchedule, RejectsBadOrders) {
  const auto inst = make(1, "abab");
  EXPECT_TRUE(check_schedule(order(1, {1, 2, 3, 4}), inst).valid);
  EXPECT_FALSE(check_schedule(order(1, {1, 3, 2, 4}), inst).valid);   // item 3 not yet arrived
  EXPECT_FALSE(check_schedule(order(1, {2, 1, 3, 4}), inst).valid);   // item 2 before arrival
  EXPECT_FALSE(check_schedule(order(1, {1, 2, 3}), inst).valid);      // not a permutation
  EXPECT_FALSE(check_schedule(order(3, {3, 1, 2, 4}), inst).valid);   // a's out of order
  EXPECT_THROW(schedule_cost(order(3, {3, 1, 2, 4}), inst), Error);
}

TEST(Simulate, SingleColorAnyDecision) {
  const auto inst = make(2, "aaaaaa");
  OldestFirst src;
  EXPECT_EQ(schedule_cost(simulate_evictions(inst, src), inst), 1);
}

TEST(Simulate, OldestFirstExamples) {
  OldestFirst src;
  const auto abab = make(2, "ababab");
  EXPECT_EQ(schedule_cost(simulate_evictions(abab, src), abab), 3);
  const auto aabb = make(2, "aabb");
  EXPECT_EQ(schedule_cost(simulate_evictions(aabb, src), aabb), 2);
}

TEST(Simulate, RejectsAbsentColor) {
  struct Bad final : DecisionSource {
    Color choose(const BufferView&, const Instance&) override { return 1; }
  } bad;
  const auto inst = make(2, "aab");
  EXPECT_THROW(simulate_evictions(inst, bad), Error);
}

TEST(Packing, RunPackingIsFeasible) {
  const auto inst = make(3, "aabbbacc");
  const auto x = run_packing(inst);
  EXPECT_TRUE(check_lp_feasibility(x, inst).feasible);
  EXPECT_DOUBLE_EQ(x.objective(), 4.0);
}

TEST(Packing, ScheduleAsBatches) {
  const auto inst = make(2, "abab");
  OldestFirst src;
  const auto s = simulate_evictions(inst, src);
  const auto x = schedule_as_batches(s, inst);
  EXPECT_TRUE(check_lp_feasibility(x, inst).feasible);
  EXPECT_DOUBLE_EQ(x.objective(), static_cast<double>(schedule_cost(s, inst)));
}

TEST(Dual, Objective) {
  DualSolution d{2, {1.0, 2.0}, {0.5, 0.25}};
  EXPECT_DOUBLE_EQ(d.objective(), 2.25);
}
