#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "rbm/core.hpp"

namespace rbm::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

// Instance text format: "k <int>" on the first line, then one color token
// per line. Blank lines are ignored.
Instance read_instance(std::istream& in);
Instance load_instance(const std::string& path);
void write_instance(std::ostream& out, const Instance& inst);
void save_instance(const std::string& path, const Instance& inst);

json to_json(const FractionalSolution& sol, const Instance& inst);
FractionalSolution fractional_from_json(const json& j, const Instance& inst);

json to_json(const DualSolution& d);
DualSolution dual_from_json(const json& j);

json to_json(const IntegralSchedule& s);
IntegralSchedule schedule_from_json(const json& j);

json load_json(const std::string& path);
void save_json(const std::string& path, const json& j);

}  // namespace rbm::io
