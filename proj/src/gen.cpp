#include "rbm/gen.hpp"

#include <cmath>
#include <sstream>

#include "rbm/rng.hpp"

namespace rbm::gen {

Kind parse_kind(const std::string& s) {
  if (s == "uniform") return Kind::kUniform;
  if (s == "round_robin") return Kind::kRoundRobin;
  if (s == "zipf") return Kind::kZipf;
  if (s == "bursty") return Kind::kBursty;
  if (s == "single_color") return Kind::kSingleColor;
  throw Error("unknown generator kind '" + s + "'");
}

std::string to_string(Kind k) {
  switch (k) {
    case Kind::kUniform: return "uniform";
    case Kind::kRoundRobin: return "round_robin";
    case Kind::kZipf: return "zipf";
    case Kind::kBursty: return "bursty";
    case Kind::kSingleColor: return "single_color";
  }
  return "?";
}

std::string color_token(std::int64_t c) {
  std::string s;
  ++c;
  while (c > 0) {
    --c;
    s.insert(s.begin(), static_cast<char>('a' + c % 26));
    c /= 26;
  }
  return s;
}

Instance generate(const GenSpec& spec, std::int64_t k, std::vector<std::string>* warnings) {
  if (spec.n < 0) throw Error("generator: n must be >= 0");
  if (spec.num_colors < 1) throw Error("generator: num_colors must be >= 1");
  const std::int64_t C = spec.kind == Kind::kSingleColor ? 1 : spec.num_colors;
  Rng rng(spec.seed);
  std::vector<Color> seq;
  seq.reserve(static_cast<std::size_t>(spec.n));

  switch (spec.kind) {
    case Kind::kSingleColor:
      seq.assign(static_cast<std::size_t>(spec.n), 0);
      break;
    case Kind::kRoundRobin:
      if (C > spec.n && warnings)
        warnings->push_back("round_robin: num_colors exceeds n; not every color appears");
      for (std::int64_t i = 0; i < spec.n; ++i) seq.push_back(static_cast<Color>(i % C));
      break;
    case Kind::kUniform:
      for (std::int64_t i = 0; i < spec.n; ++i)
        seq.push_back(static_cast<Color>(rng.below(static_cast<std::uint64_t>(C))));
      break;
    case Kind::kZipf: {
      std::vector<double> cdf(static_cast<std::size_t>(C));
      double acc = 0.0;
      for (std::int64_t r = 0; r < C; ++r) {
        acc += std::pow(static_cast<double>(r + 1), -spec.zipf_alpha);
        cdf[static_cast<std::size_t>(r)] = acc;
      }
      for (std::int64_t i = 0; i < spec.n; ++i) {
        const double u = rng.uniform() * acc;
        std::size_t r = 0;
        while (r + 1 < cdf.size() && u >= cdf[r]) ++r;
        seq.push_back(static_cast<Color>(r));
      }
      break;
    }
    case Kind::kBursty: {
      if (spec.burst_min < 1 || spec.burst_max < spec.burst_min)
        throw Error("generator: bursty needs 1 <= burst_min <= burst_max");
      const auto span = static_cast<std::uint64_t>(spec.burst_max - spec.burst_min + 1);
      while (static_cast<std::int64_t>(seq.size()) < spec.n) {
        const auto c = static_cast<Color>(rng.below(static_cast<std::uint64_t>(C)));
        const auto len = spec.burst_min + static_cast<std::int64_t>(rng.below(span));
        for (std::int64_t r = 0; r < len && static_cast<std::int64_t>(seq.size()) < spec.n; ++r)
          seq.push_back(c);
      }
      break;
    }
  }

  // Dense ids in order of first appearance keep the token/id maps aligned.
  std::vector<std::string> tokens;
  tokens.reserve(seq.size());
  for (Color c : seq) tokens.push_back(color_token(c));
  return Instance(k, tokens);
}

std::string describe(const GenSpec& spec) {
  std::ostringstream os;
  os << to_string(spec.kind) << "(n=" << spec.n << ",colors=" << spec.num_colors
     << ",seed=" << spec.seed;
  if (spec.kind == Kind::kZipf) os << ",alpha=" << spec.zipf_alpha;
  if (spec.kind == Kind::kBursty) os << ",burst=" << spec.burst_min << "-" << spec.burst_max;
  os << ")";
  return os.str();
}

}  // namespace rbm::gen
