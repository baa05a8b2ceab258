// Copyright 2026 The OptiGraph Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "optigraph/models.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "optigraph/error.hpp"

namespace optigraph {

DynOptConfig sine_disturbance(int horizon) {
  DynOptConfig cfg;
  cfg.horizon = horizon;
  for (int t = 1; t <= horizon; ++t) cfg.disturbance.push_back(std::sin(static_cast<double>(t)));
  return cfg;
}

GraphPtr build_dynamic_model(const DynOptConfig& cfg) {
  const int T = cfg.horizon;
  if (T < 2) throw ConfigError("horizon must be at least 2, got " + std::to_string(T));
  if (static_cast<int>(cfg.disturbance.size()) != T) {
    throw ConfigError("disturbance has " + std::to_string(cfg.disturbance.size()) + " entries, expected " +
                      std::to_string(T));
  }
  GraphPtr g = new_graph("dynamic");
  std::vector<VarRef> x, u;
  for (int t = 1; t <= T; ++t) {
    OptiNode& n = g->add_node("state[" + std::to_string(t) + "]");
    x.push_back(n.add_variable("x", 0.0));
    n.set_objective(square(LinExpr(x.back())));
  }
  for (int t = 1; t < T; ++t) {
    OptiNode& n = g->add_node("control[" + std::to_string(t) + "]");
    u.push_back(n.add_variable("u", -1000.0));
    n.set_objective(square(LinExpr(u.back())));
  }
  g->local_node(0).add_constraint(LinExpr(x[0]) == 0.0, "initial");
  for (int t = 0; t + 1 < T; ++t) {
    g->add_link_constraint(LinExpr(x[t + 1]) == LinExpr(x[t]) + u[t] + cfg.disturbance[t],
                           "dynamics[" + std::to_string(t + 1) + "]");
  }
  return g;
}

namespace {

void check_network(const PowerNetwork& net) {
  const int nb = static_cast<int>(net.buses.size());
  for (const Line& l : net.lines) {
    if (l.from < 0 || l.from >= nb || l.to < 0 || l.to >= nb || l.from == l.to) {
      throw ModelError("line '" + l.name + "' has invalid endpoints");
    }
    if (!(l.admittance > 0)) throw ModelError("line '" + l.name + "' needs a positive admittance");
  }
  for (const Bus& b : net.buses) {
    for (const Generator& gen : b.generators) {
      if (gen.c2 < 0) throw ModelError("generator at bus '" + b.name + "' has negative quadratic cost");
    }
  }
  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const Line& l : net.lines) parent[find(l.from)] = find(l.to);
  std::vector<char> has_ref(nb, 0);
  for (int i = 0; i < nb; ++i) {
    if (net.buses[i].reference) has_ref[find(i)] = 1;
  }
  for (int i = 0; i < nb; ++i) {
    if (!has_ref[find(i)]) throw ModelError("no reference bus in the component of bus '" + net.buses[i].name + "'");
  }
}

std::string bus_name(const PowerNetwork& net, int i) {
  return net.buses[i].name.empty() ? "bus" + std::to_string(i + 1) : net.buses[i].name;
}

std::string line_name(const PowerNetwork& net, int l) {
  return net.lines[l].name.empty() ? "line" + std::to_string(l + 1) : net.lines[l].name;
}

// Bounds on the auxiliary flow and angle copies. They are twice as wide as
// anything a feasible point reaches, so they never bind at the optimum and
// only keep relaxed subproblems bounded.
double flow_cap(const PowerNetwork& net, int l) {
  const Line& line = net.lines[l];
  const Bus& a = net.buses[line.from];
  const Bus& b = net.buses[line.to];
  const double spread = std::max(a.va_max - b.va_min, b.va_max - a.va_min);
  return 2.0 * std::abs(line.admittance) * std::min(line.angle_limit, spread);
}

std::pair<double, double> angle_copy_bounds(const Bus& bus) {
  const double width = bus.va_max - bus.va_min;
  return {bus.va_min - width, bus.va_max + width};
}

}  // namespace

GraphPtr build_dcopf_model(const PowerNetwork& net, DcopfLinks* links) {
  check_network(net);
  const int nb = static_cast<int>(net.buses.size());
  const int nl = static_cast<int>(net.lines.size());
  std::vector<std::vector<int>> lines_in(nb), lines_out(nb);
  for (int l = 0; l < nl; ++l) {
    lines_out[net.lines[l].from].push_back(l);
    lines_in[net.lines[l].to].push_back(l);
  }

  GraphPtr g = new_graph("dcopf");
  std::vector<OptiNode*> buses, lines;
  for (int i = 0; i < nb; ++i) {
    const Bus& bus = net.buses[i];
    OptiNode& n = g->add_node(bus_name(net, i));
    buses.push_back(&n);
    VarRef va = n.add_variable("va", bus.va_min, bus.va_max);
    LinExpr balance;
    QuadExpr cost;
    for (std::size_t q = 0; q < bus.generators.size(); ++q) {
      const Generator& gen = bus.generators[q];
      VarRef p = n.add_variable("P[" + std::to_string(q + 1) + "]", gen.pmin, gen.pmax);
      balance += p;
      cost += gen.c1 * LinExpr(p) + gen.c2 * square(LinExpr(p));
    }
    for (std::size_t k = 0; k < lines_in[i].size(); ++k) {
      const double cap = flow_cap(net, lines_in[i][k]);
      balance += n.add_variable("power_in[" + std::to_string(k + 1) + "]", -cap, cap);
    }
    for (std::size_t k = 0; k < lines_out[i].size(); ++k) {
      const double cap = flow_cap(net, lines_out[i][k]);
      balance -= n.add_variable("power_out[" + std::to_string(k + 1) + "]", -cap, cap);
    }
    if (!balance.terms().empty()) n.add_constraint(balance == bus.load, "power_balance");
    if (bus.reference) n.add_constraint(LinExpr(va) == bus.va_ref, "reference_angle");
    n.set_objective(cost);
  }
  for (int l = 0; l < nl; ++l) {
    const Line& line = net.lines[l];
    OptiNode& n = g->add_node(line_name(net, l));
    lines.push_back(&n);
    const auto [lo_i, hi_i] = angle_copy_bounds(net.buses[line.from]);
    const auto [lo_j, hi_j] = angle_copy_bounds(net.buses[line.to]);
    VarRef vi = n.add_variable("va_i", lo_i, hi_i);
    VarRef vj = n.add_variable("va_j", lo_j, hi_j);
    const double cap = flow_cap(net, l);
    VarRef flow = n.add_variable("flow", -cap, cap);
    const LinExpr diff = LinExpr(vi) - vj;
    n.add_constraint(LinExpr(flow) == line.admittance * diff, "flow");
    if (std::isfinite(line.angle_limit)) {
      n.add_constraint(diff <= line.angle_limit, "angle_upper");
      n.add_constraint(diff >= -line.angle_limit, "angle_lower");
    }
    n.set_objective(0.5 * net.beta * square(diff));
  }

  DcopfLinks found;
  for (int i = 0; i < nb; ++i) {
    for (std::size_t k = 0; k < lines_in[i].size(); ++k) {
      const int l = lines_in[i][k];
      found.power.push_back(g->add_link_constraint(
          LinExpr((*buses[i])["power_in[" + std::to_string(k + 1) + "]"]) == LinExpr((*lines[l])["flow"]),
          "power_in:" + bus_name(net, i) + ":" + line_name(net, l)));
    }
    for (std::size_t k = 0; k < lines_out[i].size(); ++k) {
      const int l = lines_out[i][k];
      found.power.push_back(g->add_link_constraint(
          LinExpr((*buses[i])["power_out[" + std::to_string(k + 1) + "]"]) == LinExpr((*lines[l])["flow"]),
          "power_out:" + bus_name(net, i) + ":" + line_name(net, l)));
    }
  }
  for (int l = 0; l < nl; ++l) {
    const Line& line = net.lines[l];
    found.angle.push_back(g->add_link_constraint(LinExpr((*lines[l])["va_i"]) == LinExpr((*buses[line.from])["va"]),
                                                 "angle_i:" + line_name(net, l)));
    found.angle.push_back(g->add_link_constraint(LinExpr((*lines[l])["va_j"]) == LinExpr((*buses[line.to])["va"]),
                                                 "angle_j:" + line_name(net, l)));
  }
  if (links) *links = std::move(found);
  return g;
}

DcopfLinks dcopf_links(const OptiGraph& graph) {
  DcopfLinks out;
  for (const LinkRef& ref : graph.all_link_constraints()) {
    const std::string& name = ref.get().name;
    if (name.rfind("power_", 0) == 0) {
      out.power.push_back(ref);
    } else if (name.rfind("angle_", 0) == 0) {
      out.angle.push_back(ref);
    }
  }
  return out;
}

PowerNetwork generate_grid_network(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw ConfigError("grid needs at least one row and one column");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> load(0.5, 1.5);
  std::uniform_real_distribution<double> quad_cost(0.1, 1.0);
  std::uniform_real_distribution<double> admittance(1.0, 5.0);
  PowerNetwork net;
  net.beta = 0.1;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Bus bus;
      bus.name = "bus[" + std::to_string(r) + "," + std::to_string(c) + "]";
      bus.load = load(rng);
      bus.reference = (r == 0 && c == 0);
      // Generators sit on a stride-2 lattice (a quarter of the buses) so no
      // bus is more than two lines from supply.
      if (r % 2 == 0 && c % 2 == 0) bus.generators.push_back({1.0, quad_cost(rng), 0.0, 10.0});
      net.buses.push_back(std::move(bus));
    }
  }
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) {
        net.lines.push_back({"line[" + std::to_string(net.lines.size() + 1) + "]", id(r, c), id(r, c + 1),
                             admittance(rng), 0.5});
      }
      if (r + 1 < rows) {
        net.lines.push_back({"line[" + std::to_string(net.lines.size() + 1) + "]", id(r, c), id(r + 1, c),
                             admittance(rng), 0.5});
      }
    }
  }
  return net;
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name, const std::string& file) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw ParseError(file + ": missing column '" + name + "'");
  }
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

double number(const std::vector<std::string>& row, int col, const std::string& file, std::size_t line) {
  const std::string& s = col < static_cast<int>(row.size()) ? row[col] : std::string();
  if (s.empty()) throw ParseError(file + ":" + std::to_string(line) + ": missing value");
  if (s == "inf" || s == "Inf") return kInfinity;
  if (s == "-inf" || s == "-Inf") return -kInfinity;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(file + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

}  // namespace

PowerNetwork read_network_csv(const std::filesystem::path& dir) {
  PowerNetwork net;
  std::map<std::string, int> bus_index;
  {
    const std::string file = (dir / "buses.csv").string();
    CsvTable t = read_csv(file);
    const int name = t.column("bus", file), load = t.column("load", file), lo = t.column("va_min", file),
              hi = t.column("va_max", file), ref = t.column("ref", file);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      Bus b;
      b.name = t.rows[r].at(name);
      b.load = number(t.rows[r], load, file, r + 2);
      b.va_min = number(t.rows[r], lo, file, r + 2);
      b.va_max = number(t.rows[r], hi, file, r + 2);
      b.reference = number(t.rows[r], ref, file, r + 2) != 0.0;
      if (!bus_index.emplace(b.name, static_cast<int>(net.buses.size())).second) {
        throw ParseError(file + ": duplicate bus '" + b.name + "'");
      }
      net.buses.push_back(std::move(b));
    }
  }
  auto bus_of = [&](const std::string& name, const std::string& file) {
    auto it = bus_index.find(name);
    if (it == bus_index.end()) throw ReferenceError(file + ": unknown bus '" + name + "'");
    return it->second;
  };
  {
    const std::string file = (dir / "lines.csv").string();
    CsvTable t = read_csv(file);
    const int name = t.column("line", file), from = t.column("from", file), to = t.column("to", file),
              y = t.column("admittance", file), lim = t.column("angle_limit", file);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      Line l;
      l.name = t.rows[r].at(name);
      l.from = bus_of(t.rows[r].at(from), file);
      l.to = bus_of(t.rows[r].at(to), file);
      l.admittance = number(t.rows[r], y, file, r + 2);
      l.angle_limit = number(t.rows[r], lim, file, r + 2);
      net.lines.push_back(std::move(l));
    }
  }
  const auto gens_path = dir / "gens.csv";
  if (std::filesystem::exists(gens_path)) {
    const std::string file = gens_path.string();
    CsvTable t = read_csv(file);
    const int bus = t.column("bus", file), c1 = t.column("c1", file), c2 = t.column("c2", file),
              pmin = t.column("pmin", file), pmax = t.column("pmax", file);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      Generator gen{number(t.rows[r], c1, file, r + 2), number(t.rows[r], c2, file, r + 2),
                    number(t.rows[r], pmin, file, r + 2), number(t.rows[r], pmax, file, r + 2)};
      net.buses[bus_of(t.rows[r].at(bus), file)].generators.push_back(gen);
    }
  }
  return net;
}

}  // namespace optigraph
