#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "sortgraph/analytics.hpp"
#include "sortgraph/error.hpp"
#include "sortgraph/graph_store.hpp"
#include "sortgraph/harness/compare.hpp"
#include "sortgraph/harness/edge_list.hpp"
#include "sortgraph/harness/ids.hpp"
#include "sortgraph/harness/memory.hpp"
#include "sortgraph/harness/report.hpp"
#include "sortgraph/harness/verify.hpp"
#include "sortgraph/harness/workload.hpp"
#include "sortgraph/sort_optimizer.hpp"

namespace sg = sortgraph;
namespace hn = sortgraph::harness;

namespace {

using Clock = std::chrono::steady_clock;

struct Common {
  std::string graph;
  bool undirected = false;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c, bool needs_graph) {
  auto* g = cmd->add_option("--graph", c.graph, "Edge list: 'src dst [weight]' per line");
  if (needs_graph) g->required()->check(CLI::ExistingFile);
  cmd->add_flag("--undirected", c.undirected, "Insert every edge in both directions");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--out", c.out, "Output file (default stdout)");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

// Writes to --out or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) sg::raise(sg::ErrorCode::invalid_argument, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void emit(const Common& c, const hn::Json& report, const std::vector<std::pair<std::string, std::string>>& csv) {
  Output out(c.out);
  if (c.format == "json") {
    out.stream() << report.dump(2) << '\n';
    return;
  }
  out.stream() << "key,value\n";
  for (const auto& [k, v] : csv) out.stream() << k << ',' << v << '\n';
}

std::vector<std::pair<std::string, std::string>> memory_rows(const hn::MemoryReport& m) {
  return {{"sort_bytes", std::to_string(m.sort_bytes)},
          {"vertex_table_bytes", std::to_string(m.vertex_table_bytes)},
          {"snapshot_bytes", std::to_string(m.snapshot_bytes)},
          {"log_bytes", std::to_string(m.log_bytes)},
          {"bitmap_bytes", std::to_string(m.bitmap_bytes)},
          {"total_bytes", std::to_string(m.total())}};
}

struct Loaded {
  std::vector<hn::EdgeRecord> edges;
  std::size_t zero_weight = 0;
};

Loaded load(const std::string& path) {
  hn::EdgeList list = hn::load_edge_list(path);
  for (std::size_t line : list.zero_weight_lines)
    std::cerr << "warning: line " << line << ": weight 0 remapped to the smallest positive weight\n";
  return {std::move(list.edges), list.zero_weight_lines.size()};
}

std::uint64_t count_edges(const sg::GraphStore& g) {
  sg::Snapshot s = g.snapshot();
  std::uint64_t m = 0;
  std::vector<sg::OffsetNeighbor> buffer;
  for (sg::Offset v : s.vertices()) {
    s.neighbors_of(v, buffer);
    m += buffer.size();
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sortgraph: dynamic graph store with a space-optimized radix index"};
  app.require_subcommand(1);

  // optimize
  Common opt_c;
  unsigned opt_bits = 32, opt_layers = 0;
  std::uint64_t opt_n = 1;
  bool opt_no_prune = false;
  std::string opt_baseline;
  auto* optimize_cmd = app.add_subcommand("optimize", "Optimal fanouts for n distinct ids");
  optimize_cmd->add_option("--bits,-x", opt_bits, "Identifier width")->check(CLI::Range(1, 64));
  optimize_cmd->add_option("--n,-n", opt_n, "Distinct identifiers")->required();
  optimize_cmd->add_option("--l,--layers", opt_layers, "Layer budget (0 = ceil(lg bits))");
  optimize_cmd->add_flag("--no-prune", opt_no_prune, "Disable the upper-bound prune");
  optimize_cmd->add_option("--baseline", opt_baseline, "Also report a baseline")->check(CLI::IsMember({"uniform", "veb"}));
  optimize_cmd->add_option("--out", opt_c.out, "Output file");
  optimize_cmd->add_option("--format", opt_c.format)->check(CLI::IsMember({"json", "csv"}));

  // ingest
  Common ing_c;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load an edge list and report throughput and memory");
  add_common(ingest_cmd, ing_c, true);

  // bench
  Common bench_c;
  std::string bench_workload = "insert", bench_dist = "uniform";
  std::uint64_t bench_ops = 100000;
  double bench_ratio = 0.5;
  unsigned bench_windows = 10, bench_bits = 32;
  auto* bench_cmd = app.add_subcommand("bench", "Run an insert/delete/mixed workload");
  add_common(bench_cmd, bench_c, false);
  bench_cmd->add_option("--workload", bench_workload)->check(CLI::IsMember({"insert", "delete", "mixed", "vertex-ids"}));
  bench_cmd->add_option("--ops", bench_ops, "Operation count");
  bench_cmd->add_option("--dist", bench_dist)->check(CLI::IsMember({"uniform", "skewed", "heavy-tailed"}));
  bench_cmd->add_option("--insert-ratio", bench_ratio, "Insert share of a mixed workload")->check(CLI::Range(0.0, 1.0));
  bench_cmd->add_option("--windows", bench_windows, "Reporting windows")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--bits", bench_bits, "Identifier width")->check(CLI::Range(1, 64));

  // compare-index
  Common cmp_c;
  unsigned cmp_bits = 32, cmp_layers = 0;
  std::uint64_t cmp_n = 100000;
  auto* compare_cmd = app.add_subcommand("compare-index", "uniform vs vEB vs optimized fanouts on the same ids");
  compare_cmd->add_option("--bits,-x", cmp_bits)->check(CLI::Range(1, 64));
  compare_cmd->add_option("--n,-n", cmp_n);
  compare_cmd->add_option("--l,--layers", cmp_layers);
  compare_cmd->add_option("--seed", cmp_c.seed);
  compare_cmd->add_option("--out", cmp_c.out);
  compare_cmd->add_option("--format", cmp_c.format)->check(CLI::IsMember({"json", "csv"}));

  // analytics
  Common an_c;
  an_c.format = "csv";
  std::string an_algo;
  sg::VertexId an_source = 0;
  unsigned an_k = 2, an_iters = 20, an_bc_sources = 4;
  double an_damping = 0.85;
  auto* analytics_cmd = app.add_subcommand("analytics", "Run a graph algorithm on a loaded edge list");
  analytics_cmd->add_option("algorithm", an_algo)->required()->check(CLI::IsMember({"bfs", "sssp", "pr", "wcc", "tc", "bc", "khop"}));
  add_common(analytics_cmd, an_c, true);
  analytics_cmd->add_option("--source", an_source, "Source vertex id");
  analytics_cmd->add_option("--k", an_k, "Hop limit for khop");
  analytics_cmd->add_option("--iters", an_iters, "PageRank iterations");
  analytics_cmd->add_option("--damping", an_damping, "PageRank damping")->check(CLI::Range(0.0, 1.0));
  analytics_cmd->add_option("--bc-sources", an_bc_sources, "Random sources for bc");

  // verify
  Common ver_c;
  hn::TraceOptions trace;
  double ver_seconds = 2.0;
  auto* verify_cmd = app.add_subcommand("verify", "Oracle-checked randomized run");
  verify_cmd->add_option("--ops", trace.ops);
  verify_cmd->add_option("--seed", trace.seed);
  verify_cmd->add_option("--samples", trace.samples);
  verify_cmd->add_option("--pool", trace.vertex_pool, "Distinct vertex ids in the trace");
  verify_cmd->add_option("--threads", ver_c.threads, "With >1, writers and readers run concurrently");
  verify_cmd->add_option("--seconds", ver_seconds, "Duration of a concurrent run");
  verify_cmd->add_option("--out", ver_c.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) std::cerr << "error: code=usage message=" << e.what() << '\n';
    return app.exit(e);
  }

  try {
    if (*optimize_cmd) {
      const sg::UniverseSpec spec{opt_bits, opt_n, opt_layers};
      const auto start = Clock::now();
      sg::OptimizerOptions options;
      options.upper_bound_pruning = !opt_no_prune;
      const sg::OptimizerResult r = sg::optimize_detailed(spec, options);
      const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
      hn::Json params;
      params["bits"] = opt_bits;
      params["n"] = opt_n;
      params["l"] = spec.effective_layers();
      params["pruning"] = !opt_no_prune;
      hn::Json report = hn::make_report("optimize", params, 0.0, seconds, {}, hn::Json::array());
      report["result"]["config"] = r.config.to_string();
      report["result"]["expected_slots"] = r.expected_slots;
      report["result"]["expected_bytes"] = sg::slots_to_bytes(r.expected_slots);
      report["result"]["probability_evaluations"] = r.probability_evaluations;
      report["result"]["pruned_transitions"] = r.pruned_transitions;
      std::vector<std::pair<std::string, std::string>> csv = {
          {"config", '"' + r.config.to_string() + '"'}, {"expected_slots", std::to_string(r.expected_slots)}};
      if (!opt_baseline.empty()) {
        const sg::FanoutConfig b =
            sg::baseline_config(sg::parse_baseline_kind(opt_baseline), opt_bits, spec.effective_layers());
        report["result"]["baseline"] = b.to_string();
        report["result"]["baseline_expected_slots"] = sg::expected_space(b, spec);
        csv.push_back({"baseline", '"' + b.to_string() + '"'});
      }
      emit(opt_c, report, csv);
    } else if (*ingest_cmd) {
      const Loaded data = load(ing_c.graph);
      sg::GraphStore g;
      const hn::Plan plan = hn::plan_insert(data.edges, ing_c.threads, ing_c.seed, ing_c.undirected);
      const hn::WorkloadReport run = hn::run_workload(g, plan, 1);
      g.wait_for_reoptimization();
      const hn::MemoryReport memory = hn::memory_report(g, ing_c.threads);
      hn::Json params;
      params["graph"] = ing_c.graph;
      params["undirected"] = ing_c.undirected;
      params["threads"] = ing_c.threads;
      params["seed"] = ing_c.seed;
      hn::Json report = hn::make_report("ingest", params, run.throughput, run.seconds, memory, hn::to_json(run.series));
      const std::uint64_t edges = count_edges(g);
      report["result"]["vertices"] = g.vertex_count();
      report["result"]["edges"] = edges;
      report["result"]["operations"] = run.ops;
      report["result"]["zero_weight_remaps"] = data.zero_weight;
      auto csv = memory_rows(memory);
      csv.insert(csv.begin(), {{"vertices", std::to_string(g.vertex_count())},
                               {"edges", std::to_string(edges)},
                               {"throughput_ops_per_sec", std::to_string(run.throughput)}});
      emit(ing_c, report, csv);
    } else if (*bench_cmd) {
      hn::Workload w;
      w.kind = hn::parse_workload_kind(bench_workload);
      w.seed = bench_c.seed;
      w.distribution = hn::parse_distribution(bench_dist);
      w.size = bench_ops;
      w.threads = bench_c.threads;
      w.insert_ratio = bench_ratio;
      w.bits = bench_bits;
      std::optional<std::vector<hn::EdgeRecord>> graph;
      if (!bench_c.graph.empty()) {
        graph = load(bench_c.graph).edges;
        if (bench_c.undirected) {
          const std::size_t n = graph->size();
          for (std::size_t i = 0; i < n; ++i) graph->push_back({(*graph)[i].dst, (*graph)[i].src, (*graph)[i].weight});
        }
      }
      const hn::Plan plan = hn::build_plan(w, graph);
      sg::GraphOptions options;
      options.bits = bench_bits;
      sg::GraphStore g(options);
      const hn::WorkloadReport run = hn::run_workload(g, plan, bench_windows);
      g.wait_for_reoptimization();
      g.collect_garbage();
      const hn::MemoryReport memory = hn::memory_report(g, bench_c.threads);
      hn::Json params;
      params["workload"] = bench_workload;
      params["ops"] = bench_ops;
      params["dist"] = bench_dist;
      params["threads"] = bench_c.threads;
      params["seed"] = bench_c.seed;
      params["insert_ratio"] = bench_ratio;
      if (!bench_c.graph.empty()) params["graph"] = bench_c.graph;
      hn::Json report = hn::make_report("bench", params, run.throughput, run.seconds, memory, hn::to_json(run.series));
      report["result"]["operations"] = run.ops;
      report["result"]["rejected_operations"] = run.failed_ops;
      report["result"]["vertices"] = g.vertex_count();
      report["result"]["config"] = g.config().to_string();
      auto csv = memory_rows(memory);
      csv.insert(csv.begin(), {{"operations", std::to_string(run.ops)},
                               {"duration_sec", std::to_string(run.seconds)},
                               {"throughput_ops_per_sec", std::to_string(run.throughput)}});
      emit(bench_c, report, csv);
    } else if (*compare_cmd) {
      const auto rows = hn::compare_index(cmp_bits, cmp_n, cmp_c.seed, cmp_layers);
      hn::Json params;
      params["bits"] = cmp_bits;
      params["n"] = cmp_n;
      params["l"] = sg::UniverseSpec{cmp_bits, cmp_n, cmp_layers}.effective_layers();
      params["seed"] = cmp_c.seed;
      hn::Json series = hn::Json::array();
      double seconds = 0.0;
      for (const auto& row : rows) {
        series.push_back(hn::to_json(row));
        seconds += row.insert_seconds;
      }
      hn::MemoryReport memory;
      memory.sort_bytes = rows.back().bytes;
      const hn::Json report = hn::make_report("compare-index", params, seconds > 0 ? 3.0 * cmp_n / seconds : 0.0,
                                              seconds, memory, series);
      Output out(cmp_c.out);
      if (cmp_c.format == "json") {
        out.stream() << report.dump(2) << '\n';
      } else {
        out.stream() << "structure,config,slots,slot_bytes,expected_slots,insert_seconds\n";
        for (const auto& row : rows)
          out.stream() << row.name << ",\"" << row.config.to_string() << "\"," << row.slots << ',' << row.bytes << ','
                       << row.expected_slots << ',' << row.insert_seconds << '\n';
      }
    } else if (*analytics_cmd) {
      const Loaded data = load(an_c.graph);
      sg::GraphStore g;
      hn::run_workload(g, hn::plan_insert(data.edges, an_c.threads, an_c.seed, an_c.undirected), 1);
      sg::Snapshot s = g.snapshot();
      Output out(an_c.out);
      const auto start = Clock::now();
      auto finish = [&](auto&& result) {
        if (an_c.format == "csv") {
          sg::analytics::write_csv(out.stream(), result);
          return;
        }
        hn::Json params;
        params["algorithm"] = an_algo;
        params["graph"] = an_c.graph;
        params["threads"] = an_c.threads;
        hn::Json report = hn::make_report("analytics", params, 0.0,
                                          std::chrono::duration<double>(Clock::now() - start).count(),
                                          hn::memory_report(g, an_c.threads), hn::Json::array());
        for (const auto& [id, value] : result.by_id()) report["result"][std::to_string(id)] = value;
        out.stream() << report.dump(2) << '\n';
      };
      if (an_algo == "bfs") {
        finish(sg::analytics::bfs(s, an_source));
      } else if (an_algo == "sssp") {
        finish(sg::analytics::sssp(s, an_source));
      } else if (an_algo == "pr") {
        finish(sg::analytics::pagerank(s, an_iters, an_damping, an_c.threads));
      } else if (an_algo == "wcc") {
        finish(sg::analytics::wcc(s, an_c.threads));
      } else if (an_algo == "bc") {
        std::vector<sg::Offset> vs = s.vertices();
        std::mt19937_64 rng(an_c.seed);
        std::shuffle(vs.begin(), vs.end(), rng);
        std::vector<sg::VertexId> sources;
        for (std::size_t i = 0; i < vs.size() && i < an_bc_sources; ++i) sources.push_back(s.id_of(vs[i]));
        finish(sg::analytics::betweenness(s, sources, an_c.threads));
      } else if (an_algo == "khop") {
        const auto set = sg::analytics::khop(s, an_source, an_k);
        out.stream() << "vertex_id,value\n";
        for (sg::VertexId id : set) out.stream() << id << ",1\n";
      } else {
        const std::uint64_t triangles = sg::analytics::triangle_count(s, an_c.threads);
        out.stream() << "metric,value\ntriangles," << triangles << '\n';
      }
    } else if (*verify_cmd) {
      Output out(ver_c.out);
      if (ver_c.threads <= 1) {
        const hn::TraceReport r = hn::run_oracle_trace(trace);
        out.stream() << "ops " << r.ops << " mutations " << r.mutations << " rejected " << r.rejected << " samples "
                     << r.samples_checked << " reads " << r.reads_checked << '\n';
        for (const std::string& m : r.mismatches) out.stream() << "mismatch: " << m << '\n';
        if (!r.ok()) sg::raise(sg::ErrorCode::invalid_argument, "store disagrees with the oracle");
      } else {
        hn::ConcurrentOptions c;
        c.writers = c.readers = ver_c.threads;
        c.seconds = ver_seconds;
        c.seed = trace.seed;
        c.vertices = trace.vertex_pool;
        const hn::ConcurrentReport r = hn::run_concurrent_check(c);
        out.stream() << "writer_ops " << r.writer_ops << " mutations " << r.mutations << " snapshots " << r.snapshots
                     << " reads " << r.reads_checked << '\n';
        for (const std::string& m : r.mismatches) out.stream() << "mismatch: " << m << '\n';
        if (!r.ok()) sg::raise(sg::ErrorCode::invalid_argument, "store disagrees with the oracle");
      }
      out.stream() << "ok\n";
    }
  } catch (const sg::Error& e) {
    std::cerr << "error: code=" << sg::to_string(e.code()) << " message=" << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: code=internal message=" << e.what() << '\n';
    return 2;
  }
  return 0;
}
