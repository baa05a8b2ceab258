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

// Benchmark model builders: a discrete-time control problem and DC optimal
// power flow over a bus/line network.

#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "optigraph/model.hpp"

namespace optigraph {

struct DynOptConfig {
  int horizon = 100;
  std::vector<double> disturbance;  // d_1..d_T
};

// d_t = sin(t), t = 1..T.
DynOptConfig sine_disturbance(int horizon);

// State nodes state[1..T] (x >= 0, min x^2), control nodes control[1..T-1]
// (u >= -1000, min u^2), x_1 = 0 on the first state and links
// x_{t+1} = x_t + u_t + d_t. Throws ConfigError for T < 2 or a wrong-length
// disturbance.
GraphPtr build_dynamic_model(const DynOptConfig& cfg);

struct Generator {
  double c1 = 0.0;
  double c2 = 0.0;
  double pmin = 0.0;
  double pmax = kInfinity;
};

struct Bus {
  std::string name;
  double load = 0.0;
  double va_min = -std::numbers::pi;
  double va_max = std::numbers::pi;
  bool reference = false;
  double va_ref = 0.0;
  std::vector<Generator> generators;
};

struct Line {
  std::string name;
  int from = 0;
  int to = 0;
  double admittance = 1.0;
  double angle_limit = kInfinity;
};

struct PowerNetwork {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  double beta = 0.1;
};

// Link constraints of a DC OPF graph grouped by kind.
struct DcopfLinks {
  std::vector<LinkRef> power;  // bus power_in/power_out == line flow
  std::vector<LinkRef> angle;  // line va_i/va_j == bus va
};

// One node per bus then one per line. Throws ModelError on invalid data or
// a connected component without a reference bus.
GraphPtr build_dcopf_model(const PowerNetwork& net, DcopfLinks* links = nullptr);

// Recovers the link groups of a DC OPF graph from link names.
DcopfLinks dcopf_links(const OptiGraph& graph);

// rows x cols lattice with lines pointing right and down.
PowerNetwork generate_grid_network(int rows, int cols, std::uint64_t seed);

// Reads buses.csv, lines.csv and (optionally) gens.csv from `dir`.
PowerNetwork read_network_csv(const std::filesystem::path& dir);

}  // namespace optigraph
