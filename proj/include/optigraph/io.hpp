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


// JSON model and solution documents and DOT export.
//
// A model document is {"schema_version": 1, "graph": G} where G holds
// "name", "nodes", "edges" and "subgraphs". Link terms name variables as
// "node.var"; node constraints and objectives use bare variable names.
// Infinite bounds are omitted. Keys are sorted and reals use the shortest
// decimal form that reads back to the same double, so emit(parse(emit(g)))
// is byte-identical to emit(g).

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "optigraph/model.hpp"
#include "optigraph/qp_solver.hpp"

namespace optigraph {

inline constexpr int kSchemaVersion = 1;

// Throws ModelError when two nodes share a name.
std::string model_to_json(const OptiGraph& graph);
// Throws ParseError (with line and column) on malformed input or an
// unsupported schema_version, ReferenceError naming an unresolved "node.var".
GraphPtr model_from_json(std::string_view text);

void write_model(const OptiGraph& graph, const std::filesystem::path& path);
GraphPtr read_model(const std::filesystem::path& path);

// Status, objective, iteration count and every variable value keyed
// "node.var". `method` is recorded as given.
std::string solution_to_json(const Solution& solution, std::string_view method);

struct DotOptions {
  // Fill vertices by top-level subgraph, cycling a 12-color palette.
  bool color_partitions = false;
  // One vertex per top-level subgraph (and per top-level node).
  bool aggregated = false;
};

// Undirected DOT of the clique projection.
std::string export_dot(const OptiGraph& graph, const DotOptions& opts = {});

// Writes `text` to `path`, throwing ConfigError when the file cannot be opened.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace optigraph
