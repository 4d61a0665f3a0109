#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbm/core.hpp"

namespace rbm::gen {

enum class Kind { kUniform, kRoundRobin, kZipf, kBursty, kSingleColor };

Kind parse_kind(const std::string& s);
std::string to_string(Kind k);

struct GenSpec {
  Kind kind = Kind::kRoundRobin;
  std::int64_t n = 0;
  std::int64_t num_colors = 2;
  std::uint64_t seed = 1;
  double zipf_alpha = 1.0;
  std::int64_t burst_min = 1;
  std::int64_t burst_max = 8;
};

// Color token for dense id c: a, b, ..., z, aa, ab, ...
std::string color_token(std::int64_t c);

// Deterministic given the spec. Warnings (for example round_robin with more
// colors than items) are appended to `warnings` when provided.
Instance generate(const GenSpec& spec, std::int64_t k, std::vector<std::string>* warnings = nullptr);

std::string describe(const GenSpec& spec);

}  // namespace rbm::gen
