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


// Node partitions (balanced hypergraph partitioning, metrics, reforming a
// graph into subgraphs) and aggregation of subgraphs into single nodes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "optigraph/model.hpp"
#include "optigraph/topology.hpp"

namespace optigraph {

// Labels in {0..k-1} per hypergraph vertex. Only the upper balance bound
// sum_{v in P_i} s(v) <= (1 + eps_max) * S / k is enforced. Cut weight is then
// reduced by FM passes until no single move improves it. Deterministic for a
// fixed seed. Throws BalanceError when no labeling meets the bound.
std::vector<int> partition_heuristic(const Hypergraph& h, int k, double eps_max, std::uint64_t seed = 0);

// Upper bound on a part size used by partition_heuristic.
double balance_bound(const Hypergraph& h, int k, double eps_max);

struct PartitionMetrics {
  double edge_cut = 0.0;
  double connectivity = 0.0;
  std::vector<double> part_sizes;
  double imbalance = 0.0;
};

PartitionMetrics metrics(const std::vector<int>& labels, int k, const Hypergraph& h);

struct Partition {
  std::vector<int> labels;  // per node of graph->all_nodes()
  int k = 0;
  const OptiGraph* graph = nullptr;
  std::uint64_t revision = 0;
};

// Moves labels of a projection back to nodes. Edge vertices of a bipartite
// projection are ignored. k defaults to max label + 1.
Partition make_partition(const OptiGraph& graph, const std::vector<int>& labels, const RefMap& ref,
                         int k = -1);

// Hypergraph projection, heuristic and make_partition in one call.
Partition partition_graph(const OptiGraph& graph, int k, double eps_max, std::uint64_t seed = 0);

// One subgraph per non-empty part; crossing edges move to the top level and
// the previous hierarchy is discarded. Throws StalenessError if the graph
// changed after the partition was made.
void apply_partition(OptiGraph& graph, const Partition& partition);

// One base-10 label per line.
void write_partition_file(const std::filesystem::path& path, const std::vector<int>& labels);
std::vector<int> read_partition_file(const std::filesystem::path& path);

struct AggregationMap {
  // Where an original link constraint ended up: a link of the aggregate, or a
  // node constraint when the link was internal to a collapsed subgraph.
  struct LinkTarget {
    std::optional<LinkRef> link;
    const OptiNode* node = nullptr;
    std::size_t index = 0;
  };

  VarMap<VarRef> variables;
  std::map<std::pair<const OptiNode*, std::size_t>, std::pair<const OptiNode*, std::size_t>> node_constraints;
  std::map<std::pair<const OptiEdge*, std::size_t>, LinkTarget> link_constraints;

  VarRef operator[](VarRef original) const;
  // Original variable values from the aggregate's values.
  VarMap<double> transport(const std::function<double(VarRef)>& aggregate_value) const;
};

// Copies `graph`, keeping `levels` levels of subgraphs. Every subgraph at
// depth levels + 1 becomes a single node holding the union of its variables
// and constraints and the sum of its objectives; links internal to it become
// node constraints.
std::pair<GraphPtr, AggregationMap> aggregate(const OptiGraph& graph, int levels);

}  // namespace optigraph
