#include "rbm/io.hpp"

#include <fstream>
#include <sstream>

namespace rbm::io {
namespace {

void check_version(const json& j, const char* what) {
  if (!j.contains("format_version") || j.at("format_version").get<int>() != kFormatVersion)
    throw Error(std::string(what) + ": missing or unsupported format_version");
}

}  // namespace

Instance read_instance(std::istream& in) {
  std::string line;
  std::int64_t k = -1;
  std::vector<std::string> tokens;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (k < 0) {
      if (tok != "k" || !(ls >> k) || k < 1)
        throw Error("instance file must start with 'k <positive int>'");
      continue;
    }
    std::string extra;
    if (ls >> extra) throw Error("color tokens must not contain whitespace: '" + line + "'");
    tokens.push_back(tok);
  }
  if (k < 0) throw Error("instance file is missing the 'k' header");
  return Instance(k, tokens);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open instance file " + path);
  return read_instance(in);
}

void write_instance(std::ostream& out, const Instance& inst) {
  out << "k " << inst.k() << '\n';
  for (Item i = 1; i <= inst.n(); ++i) out << inst.name(inst.color(i)) << '\n';
}

void save_instance(const std::string& path, const Instance& inst) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_instance(out, inst);
}

json to_json(const FractionalSolution& sol, const Instance& inst) {
  json batches = json::array();
  for (const auto& b : sol.batches)
    batches.push_back({{"color", inst.name(b.color)},
                       {"first", b.first},
                       {"last", b.last},
                       {"start_slot", b.start_slot},
                       {"weight", b.weight}});
  return {{"format_version", kFormatVersion},
          {"kind", "fractional_solution"},
          {"k", sol.k},
          {"objective", sol.objective()},
          {"batches", std::move(batches)}};
}

FractionalSolution fractional_from_json(const json& j, const Instance& inst) {
  check_version(j, "fractional solution");
  FractionalSolution sol;
  sol.k = j.at("k").get<std::int64_t>();
  for (const auto& b : j.at("batches")) {
    const auto name = b.at("color").get<std::string>();
    const auto c = inst.find_color(name);
    if (!c) throw Error("batch names unknown color '" + name + "'");
    sol.batches.push_back({*c, b.at("first").get<Item>(), b.at("last").get<Item>(),
                           b.at("start_slot").get<Slot>(), b.at("weight").get<double>()});
  }
  return sol;
}

json to_json(const DualSolution& d) {
  return {{"format_version", kFormatVersion},
          {"kind", "dual_solution"},
          {"kappa", d.kappa},
          {"objective", d.objective()},
          {"y", d.y},
          {"z", d.z}};
}

DualSolution dual_from_json(const json& j) {
  check_version(j, "dual solution");
  DualSolution d;
  d.kappa = j.at("kappa").get<std::int64_t>();
  d.y = j.at("y").get<std::vector<double>>();
  d.z = j.at("z").get<std::vector<double>>();
  return d;
}

json to_json(const IntegralSchedule& s) {
  return {{"format_version", kFormatVersion},
          {"kind", "integral_schedule"},
          {"k", s.k},
          {"output", s.output}};
}

IntegralSchedule schedule_from_json(const json& j) {
  check_version(j, "integral schedule");
  IntegralSchedule s;
  s.k = j.at("k").get<std::int64_t>();
  s.output = j.at("output").get<std::vector<Item>>();
  return s;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(1) << '\n';
}

}  // namespace rbm::io
