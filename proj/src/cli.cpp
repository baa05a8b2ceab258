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


#include "optigraph/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "optigraph/error.hpp"
#include "optigraph/io.hpp"
#include "optigraph/models.hpp"
#include "optigraph/partition.hpp"
#include "optigraph/schur.hpp"
#include "optigraph/schwarz.hpp"

namespace optigraph {

namespace {

// Raised for solver failures so they map to their own exit code.
struct SolveFailure {
  std::string message;
};

int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Partition make_or_read_partition(const OptiGraph& g, int k, double imbalance, std::uint64_t seed,
                                 const std::string& from_labels) {
  if (from_labels.empty()) return partition_graph(g, k, imbalance, seed);
  const auto [h, ref] = to_hypergraph(g);
  return make_partition(g, read_partition_file(from_labels), ref, k > 0 ? k : -1);
}

// Schur solve with one block per top-level subgraph, reported on the
// variables of `g`.
Solution structured_on_original(const OptiGraph& g, const SolverOptions& opts) {
  if (g.subgraphs().empty()) return solve_structured(g, opts);
  const auto [a, map] = aggregate(g, 0);
  const Solution s = solve_structured(*a, opts);
  Solution out;
  out.status = s.status;
  out.iterations = s.iterations;
  out.objective = s.objective;
  auto qp = std::make_shared<const FlatQP>(flatten(g));
  out.x.resize(qp->num_variables());
  for (int j = 0; j < qp->num_variables(); ++j) out.x[j] = s.value(map[qp->var_map[j]]);
  out.qp = std::move(qp);
  return out;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-structured optimization toolkit", "optigraph"};
  app.require_subcommand(1);

  // build
  CLI::App* build = app.add_subcommand("build", "Build a benchmark model");
  std::string kind, output, network_dir;
  int horizon = 100, rows = 8, cols = 8;
  std::uint64_t seed = 0;
  double beta = 0.1;
  build->add_option("kind", kind, "dynamic, dcopf-grid or dcopf-csv")
      ->required()
      ->check(CLI::IsMember({"dynamic", "dcopf-grid", "dcopf-csv"}));
  build->add_option("--T", horizon, "Horizon of the dynamic model")->check(CLI::PositiveNumber);
  build->add_option("--rows", rows, "Grid rows")->check(CLI::PositiveNumber);
  build->add_option("--cols", cols, "Grid columns")->check(CLI::PositiveNumber);
  build->add_option("--seed", seed, "Network seed");
  build->add_option("--network", network_dir, "Directory with buses.csv, lines.csv, gens.csv")
      ->check(CLI::ExistingDirectory);
  build->add_option("--beta", beta, "Angle regularization of the DC OPF lines")->check(CLI::NonNegativeNumber);
  build->add_option("-o,--output", output, "Model JSON")->required();

  // partition
  CLI::App* part = app.add_subcommand("partition", "Partition a model into subgraphs");
  std::string model, labels_out, labels_in, objective = "edgecut";
  int k = 2;
  double imbalance = 0.1;
  part->add_option("model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  part->add_option("-k", k, "Number of parts")->check(CLI::PositiveNumber);
  part->add_option("--imbalance", imbalance, "Allowed imbalance")->check(CLI::NonNegativeNumber);
  part->add_option("--seed", seed, "Partitioner seed");
  part->add_option("--labels", labels_out, "Write one label per node");
  part->add_option("--from-labels", labels_in, "Read labels instead of partitioning")->check(CLI::ExistingFile);
  part->add_option("--objective", objective, "Partition objective")->check(CLI::IsMember({"edgecut"}));
  part->add_option("-o,--output", output, "Partitioned model JSON");

  // aggregate
  CLI::App* agg = app.add_subcommand("aggregate", "Collapse subgraphs into nodes");
  int levels = 0;
  agg->add_option("model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  agg->add_option("--levels", levels, "Subgraph levels to keep")->check(CLI::NonNegativeNumber);
  agg->add_option("-o,--output", output, "Aggregated model JSON")->required();

  // solve
  CLI::App* solve = app.add_subcommand("solve", "Solve a model");
  std::string method = "monolithic", trace_path, treatment = "dual";
  std::optional<int> parts;
  int overlap = 1, max_iter = 100, threads = default_threads();
  double tol = 1e-6;
  solve->add_option("model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--method", method, "monolithic, schur or schwarz")
      ->check(CLI::IsMember({"monolithic", "schur", "schwarz"}));
  solve->add_option("--parts", parts, "Partition into this many parts first")->check(CLI::PositiveNumber);
  solve->add_option("--imbalance", imbalance, "Allowed imbalance with --parts")->check(CLI::NonNegativeNumber);
  solve->add_option("--seed", seed, "Partitioner seed");
  solve->add_option("--overlap", overlap, "Schwarz expansion distance")->check(CLI::NonNegativeNumber);
  solve->add_option("--tol", tol, "Schwarz tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", max_iter, "Schwarz iteration limit")->check(CLI::PositiveNumber);
  solve->add_option("--treatment", treatment, "Schwarz incident link treatment: dual, primal or owner")
      ->check(CLI::IsMember({"dual", "primal", "owner"}));
  solve->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  solve->add_option("--trace", trace_path, "Schwarz residual trace CSV");
  solve->add_option("-o,--output", output, "Solution JSON")->required();

  // export
  CLI::App* exp = app.add_subcommand("export", "Export the graph");
  std::string format;
  bool color = false, aggregated = false;
  exp->add_option("model", model, "Model JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--format", format, "Output format")->required()->check(CLI::IsMember({"dot"}));
  exp->add_flag("--color-partitions", color, "Color vertices by subgraph");
  exp->add_flag("--aggregated", aggregated, "One vertex per subgraph");
  exp->add_option("-o,--output", output, "DOT file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (*build) {
      GraphPtr g;
      if (kind == "dynamic") {
        g = build_dynamic_model(sine_disturbance(horizon));
      } else {
        if (kind == "dcopf-csv" && network_dir.empty()) {
          err << "error: dcopf-csv needs --network\n";
          return kExitUsage;
        }
        PowerNetwork net = kind == "dcopf-csv" ? read_network_csv(network_dir) : generate_grid_network(rows, cols, seed);
        net.beta = beta;
        g = build_dcopf_model(net);
      }
      write_model(*g, output);
      out << "nodes " << g->all_nodes().size() << " edges " << g->all_edges().size() << "\n";
    } else if (*part) {
      GraphPtr g = read_model(model);
      const Partition p = make_or_read_partition(*g, labels_in.empty() ? k : -1, imbalance, seed, labels_in);
      const auto [h, ref] = to_hypergraph(*g);
      const PartitionMetrics m = metrics(p.labels, p.k, h);
      out << "parts " << p.k << " edge_cut " << m.edge_cut << " connectivity " << m.connectivity << " imbalance "
          << m.imbalance << "\nsizes";
      for (double s : m.part_sizes) out << ' ' << s;
      out << "\n";
      if (!labels_out.empty()) write_partition_file(labels_out, p.labels);
      if (!output.empty()) {
        apply_partition(*g, p);
        write_model(*g, output);
      }
    } else if (*agg) {
      GraphPtr g = read_model(model);
      auto [a, map] = aggregate(*g, levels);
      write_model(*a, output);
      out << "nodes " << a->all_nodes().size() << " edges " << a->all_edges().size() << "\n";
    } else if (*solve) {
      if (!trace_path.empty() && method != "schwarz") {
        err << "error: --trace needs --method schwarz\n";
        return kExitUsage;
      }
      GraphPtr g = read_model(model);
      if (parts) apply_partition(*g, partition_graph(*g, *parts, imbalance, seed));
      Solution sol;
      std::string detail;
      try {
        if (method == "monolithic") {
          sol = solve_monolithic(flatten(*g));
        } else if (method == "schur") {
          SolverOptions so;
          so.threads = threads;
          sol = structured_on_original(*g, so);
        } else {
          SchwarzOptions so;
          so.overlap = overlap;
          so.tol = tol;
          so.max_iter = max_iter;
          so.threads = threads;
          so.default_treatment = treatment == "dual"     ? LinkTreatment::kDual
                                 : treatment == "primal" ? LinkTreatment::kPrimal
                                                         : LinkTreatment::kOwner;
          std::ofstream trace;
          if (!trace_path.empty()) {
            trace.open(trace_path);
            if (!trace) throw ConfigError("cannot write '" + trace_path + "'");
            so.trace = &trace;
          }
          SchwarzResult r = schwarz_solve(*g, so);
          sol = std::move(r.solution);
          if (r.failed_subgraph) detail = "subproblem " + std::to_string(*r.failed_subgraph) + " failed";
          if (r.diverged) detail = "primal residual diverged";
          if (!r.history.empty()) {
            out << "r_pr " << r.history.back().primal << " r_du " << r.history.back().dual << "\n";
          }
        }
      } catch (const Error& e) {
        throw SolveFailure{e.what()};
      }
      write_text(output, solution_to_json(sol, method));
      out << "status " << to_string(sol.status) << " objective " << sol.objective << " iterations " << sol.iterations
          << "\n";
      if (!sol.optimal()) {
        err << "error: solve ended with status " << to_string(sol.status);
        if (!detail.empty()) err << " (" << detail << ")";
        err << "\n";
        return kExitSolveFailure;
      }
    } else if (*exp) {
      DotOptions opts;
      opts.color_partitions = color;
      opts.aggregated = aggregated;
      write_text(output, export_dot(*read_model(model), opts));
    }
  } catch (const SolveFailure& e) {
    err << "error: " << e.message << "\n";
    return kExitSolveFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace optigraph
