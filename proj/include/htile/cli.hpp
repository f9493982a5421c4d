#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htile/exact.hpp"
#include "htile/experiments.hpp"
#include "htile/heuristic.hpp"
#include "htile/theory.hpp"

namespace htile::cli {

enum ExitCode : int { kOk = 0, kInvalid = 1, kUsage = 2, kInfeasible = 3, kTimeout = 4, kInterrupted = 130 };

/// Environment variable naming the default directory for experiment output.
inline constexpr const char* kOutDirEnv = "HTILE_OUT_DIR";

namespace detail {

struct GraphSource {
  std::string named;
  std::string file;

  void add_to(CLI::App* app) {
    auto* a = app->add_option("--named", named, "named pattern, e.g. complete:3 or complete:4+complete:2");
    auto* b = app->add_option("--file", file, "edge-list file for the pattern");
    a->excludes(b);
  }

  GraphH load() const {
    if (named.empty() == file.empty()) throw UsageError("give exactly one of --named and --file");
    if (!named.empty()) return graph_from_spec(named);
    std::ifstream in(file);
    if (!in) throw UsageError("cannot read " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_graph(ss.str(), std::filesystem::path(file).filename().string());
  }

  json to_json() const { return named.empty() ? json{{"file", file}} : json{{"named", named}}; }
};

struct InstanceSource {
  int n = 0;
  std::uint64_t seed = 1;
  std::string dist = "exp";
  std::string instance_file;

  void add_to(CLI::App* app) {
    app->add_option("--n", n, "number of host vertices");
    app->add_option("--seed", seed, "instance seed")->capture_default_str();
    app->add_option("--dist", dist, "weight distribution: exp, exp:<rate> or uniform")->capture_default_str();
    app->add_option("--instance", instance_file, "load the instance from a binary dump instead of sampling");
  }

  WeightedInstance load() const {
    if (!instance_file.empty()) {
      std::ifstream in(instance_file, std::ios::binary);
      if (!in) throw UsageError("cannot read " + instance_file);
      return load_instance(in);
    }
    if (n == 0) throw UsageError("--n is required");
    return sample_instance(n, WeightDistribution::parse(dist), seed);
  }

  json to_json(const WeightedInstance& inst) const {
    json j;
    if (!instance_file.empty()) j["instance"] = instance_file;
    j["n"] = inst.n();
    j["seed"] = inst.seed();
    j["dist"] = inst.distribution().name();
    return j;
  }
};

inline double parse_real_arg(const std::string& s, const char* what) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw UsageError(std::string(what) + " must be a number or inf, got \"" + s + "\"");
  return v;
}

inline void print_table(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
}

inline std::string vertex_set(const std::vector<int>& vs) {
  std::string s = "{";
  for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + std::to_string(vs[i]);
  return s + "}";
}

inline json report_json(const DensityReport& r) {
  json j;
  j["vertices"] = r.vertex_count;
  j["edges"] = r.edge_count;
  j["d_H"] = r.d_h.str();
  j["d_star"] = r.d_star.str();
  j["delta"] = r.delta.str();
  j["h_star_vertices"] = r.h_star_vertices;
  j["delta_witness_vertices"] = r.delta_witness_vertices;
  j["strictly_balanced"] = r.strictly_balanced;
  j["balanced"] = r.balanced;
  j["aut"] = r.aut_count;
  j["predicted_exponent"] = predicted_exponent(r);
  j["cover_lower_exponent"] = cover_lower_exponent(r);
  return j;
}

inline int finish_solve(const SolveResult& r, std::ostream& out, std::ostream& err, json record) {
  record["status"] = to_string(r.status);
  record["nodes"] = r.nodes;
  if (r.solution) record["solution"] = solution_to_json(*r.solution);
  out << dump_line(record) << '\n';
  switch (r.status) {
    case SolveStatus::optimal:
      err << "optimal weight " << format_real(r.weight()) << " with " << r.solution->copies.size() << " copies, "
          << r.solution->uncovered << " vertices uncovered\n";
      return kOk;
    case SolveStatus::infeasible: err << "infeasible\n"; return kInfeasible;
    case SolveStatus::timeout:
      err << "node limit reached";
      if (r.solution) err << "; best incumbent " << format_real(r.weight());
      err << '\n';
      return kTimeout;
  }
  return kOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. Machine-readable records go
/// to `out`, everything meant for people to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                   const std::atomic<bool>* cancel = nullptr) {
  CLI::App app{"Minimum-weight H-factors and H-covers of randomly weighted complete graphs", "htile"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand all help");

  // analyze
  detail::GraphSource analyze_graph;
  int analyze_limit = 16;
  std::string analyze_format = "table";
  auto* analyze_cmd = app.add_subcommand("analyze", "density invariants of a pattern graph");
  analyze_graph.add_to(analyze_cmd);
  analyze_cmd->add_option("--max-vertices", analyze_limit, "largest pattern for the exhaustive scan")->capture_default_str();
  analyze_cmd->add_option("--format", analyze_format, "table or json")->check(CLI::IsMember({"table", "json"}))->capture_default_str();

  // solve
  detail::GraphSource solve_graph;
  detail::InstanceSource solve_inst;
  std::string solve_mode = "factor", solve_solver = "exact", solve_cap = "inf", solve_save;
  int solve_k = 0;
  double solve_alpha = -1.0;
  std::uint64_t solve_nodes = SolverOptions{}.node_limit;
  auto* solve_cmd = app.add_subcommand("solve", "minimum-weight partial factor or cover of one instance");
  solve_graph.add_to(solve_cmd);
  solve_inst.add_to(solve_cmd);
  solve_cmd->add_option("--mode", solve_mode, "factor or cover")->check(CLI::IsMember({"factor", "cover"}))->capture_default_str();
  auto* k_opt = solve_cmd->add_option("--k", solve_k, "vertices allowed to stay uncovered")->capture_default_str();
  solve_cmd->add_option("--alpha", solve_alpha, "uncovered fraction; sets k = floor(alpha n)")->excludes(k_opt);
  solve_cmd->add_option("--cap", solve_cap, "largest usable edge weight")->capture_default_str();
  solve_cmd->add_option("--solver", solve_solver, "exact, heuristic or oracle")
      ->check(CLI::IsMember({"exact", "heuristic", "oracle"}))
      ->capture_default_str();
  solve_cmd->add_option("--node-limit", solve_nodes, "search nodes before giving up")->capture_default_str();
  solve_cmd->add_option("--save-instance", solve_save, "write the instance as a binary dump");

  // budget
  detail::GraphSource budget_graph;
  detail::InstanceSource budget_inst;
  std::string budget_value, budget_cap = "inf";
  std::uint64_t budget_nodes = SolverOptions{}.node_limit;
  auto* budget_cmd = app.add_subcommand("budget", "most vertices coverable by disjoint copies within a weight budget");
  budget_graph.add_to(budget_cmd);
  budget_inst.add_to(budget_cmd);
  budget_cmd->add_option("--budget", budget_value, "weight budget L")->required();
  budget_cmd->add_option("--cap", budget_cap, "largest usable edge weight")->capture_default_str();
  budget_cmd->add_option("--node-limit", budget_nodes, "search nodes per probe")->capture_default_str();

  // experiment
  std::string exp_config, exp_out;
  int exp_threads = 0;
  bool exp_quiet = false;
  auto* exp_cmd = app.add_subcommand("experiment", "run a Monte Carlo experiment from a JSON config");
  exp_cmd->add_option("--config", exp_config, "experiment config file")->required();
  exp_cmd->add_option("--out", exp_out, std::string("output directory (default $") + kOutDirEnv + " or .)");
  exp_cmd->add_option("--threads", exp_threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  exp_cmd->add_flag("--quiet", exp_quiet, "no progress output");

  // validate
  detail::GraphSource val_graph;
  detail::InstanceSource val_inst;
  std::string val_config, val_solution;
  auto* val_cmd = app.add_subcommand("validate", "check an experiment config or a solution record");
  val_graph.add_to(val_cmd);
  val_inst.add_to(val_cmd);
  auto* vc = val_cmd->add_option("--config", val_config, "experiment config to check");
  auto* vs = val_cmd->add_option("--solution", val_solution, "solution record (JSON) to check");
  vc->excludes(vs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*analyze_cmd) {
      const auto h = analyze_graph.load();
      AnalyzeOptions ao;
      ao.max_vertices = analyze_limit;
      const auto r = analyze(h, ao);
      json cfg{{"type", "config"}, {"command", "analyze"}, {"graph", analyze_graph.to_json()}, {"max_vertices", analyze_limit}};
      if (analyze_format == "json") {
        out << dump_line(cfg) << '\n';
        json rec{{"type", "analysis"}, {"H", h.label()}};
        const auto fields = detail::report_json(r);
        for (const auto& [k, v] : fields.items()) rec[k] = v;
        out << dump_line(rec) << '\n';
        return kOk;
      }
      out << "# " << dump_line(cfg) << '\n';
      detail::print_table(out, {{"H", h.label()},
                                {"vertices", std::to_string(r.vertex_count)},
                                {"edges", std::to_string(r.edge_count)},
                                {"d_H", r.d_h.str()},
                                {"d*", r.d_star.str()},
                                {"Delta", r.delta.str()},
                                {"H*", detail::vertex_set(r.h_star_vertices)},
                                {"Delta witness", detail::vertex_set(r.delta_witness_vertices)},
                                {"strictly_balanced", r.strictly_balanced ? "true" : "false"},
                                {"balanced", r.balanced ? "true" : "false"},
                                {"aut", std::to_string(r.aut_count)},
                                {"predicted_exponent", format_real(predicted_exponent(r))},
                                {"cover_lower_exponent", format_real(cover_lower_exponent(r))}});
      return kOk;
    }

    if (*solve_cmd) {
      const auto h = solve_graph.load();
      const auto inst = solve_inst.load();
      const auto mode = parse_mode(solve_mode);
      const double cap = detail::parse_real_arg(solve_cap, "--cap");
      const int k = solve_alpha >= 0.0 ? static_cast<int>(std::floor(solve_alpha * inst.n())) : solve_k;
      if (solve_alpha >= 1.0) throw UsageError("--alpha must lie in [0, 1)");
      if (!solve_save.empty()) {
        std::ofstream os(solve_save, std::ios::binary);
        if (!os) throw UsageError("cannot write " + solve_save);
        save_instance(os, inst);
      }
      json cfg{{"type", "config"},
               {"command", "solve"},
               {"graph", solve_graph.to_json()},
               {"instance", solve_inst.to_json(inst)},
               {"mode", to_string(mode)},
               {"k", k},
               {"cap", real_value(cap)},
               {"solver", solve_solver},
               {"node_limit", solve_nodes}};
      out << dump_line(cfg) << '\n';
      json record{{"type", "solution"}, {"H", h.label()}, {"solver", solve_solver}};
      if (solve_solver == "oracle") return detail::finish_solve(brute_force_oracle(inst, h, mode, k, cap), out, err, record);
      if (solve_solver == "exact") {
        SolverOptions so;
        so.node_limit = solve_nodes;
        const auto r = mode == Mode::factor ? min_factor(inst, h, k, cap, so) : min_cover(inst, h, k, cap, so);
        return detail::finish_solve(r, out, err, record);
      }
      // Heuristic: the recursive construction for complete factors, greedy otherwise.
      ExperimentConfig hc;
      hc.solver = "heuristic";
      auto s = htile::detail::solve_cell(inst, h, mode, k, cap, hc);
      SolveResult r;
      r.solution = s.solution;
      if (s.status == "ok") {
        r.status = SolveStatus::optimal;
      } else {
        r.status = SolveStatus::infeasible;
        r.solution.reset();
      }
      record["optimal"] = s.optimal;
      return detail::finish_solve(r, out, err, record);
    }

    if (*budget_cmd) {
      const auto h = budget_graph.load();
      const auto inst = budget_inst.load();
      const double l = detail::parse_real_arg(budget_value, "--budget");
      const double cap = detail::parse_real_arg(budget_cap, "--cap");
      SolverOptions so;
      so.node_limit = budget_nodes;
      out << dump_line(json{{"type", "config"},
                            {"command", "budget"},
                            {"graph", budget_graph.to_json()},
                            {"instance", budget_inst.to_json(inst)},
                            {"budget", real_value(l)},
                            {"cap", real_value(cap)},
                            {"node_limit", budget_nodes}})
          << '\n';
      const auto r = max_coverage_under_budget(inst, h, l, cap, so);
      out << dump_line(json{{"type", "budget"},
                            {"H", h.label()},
                            {"status", to_string(r.status)},
                            {"budget", real_value(l)},
                            {"covered", r.value.covered},
                            {"solution", solution_to_json(r.value.solution)}})
          << '\n';
      err << "covered " << r.value.covered << " of " << inst.n() << " vertices with weight "
          << format_real(r.value.solution.total_weight) << '\n';
      return r.status == SolveStatus::timeout ? kTimeout : kOk;
    }

    if (*exp_cmd) {
      std::ifstream in(exp_config);
      if (!in) throw UsageError("cannot read " + exp_config);
      json raw;
      try {
        raw = json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
      }
      auto cfg = config_from_json(raw);
      if (cfg.name.empty()) cfg.name = std::filesystem::path(exp_config).stem().string();
      if (exp_threads > 0) cfg.threads = exp_threads;
      validate_config(cfg, resolve_graph(cfg));
      std::string dir = exp_out;
      if (dir.empty()) {
        const char* env = std::getenv(kOutDirEnv);
        dir = env && *env ? env : ".";
      }
      std::filesystem::create_directories(dir);
      RunOptions ro;
      ro.cancel = cancel;
      if (!exp_quiet)
        ro.progress = [&err](std::size_t done, std::size_t total) {
          if (done == total || done % 50 == 0) err << "  " << done << "/" << total << " cells\n";
        };
      err << "running " << cfg.experiment << " (" << cfg.stem() << ")\n";
      const auto res = run_experiment(cfg, ro);
      const auto base = std::filesystem::path(dir) / cfg.stem();
      {
        std::ofstream os(base.string() + ".jsonl");
        write_records(os, res);
      }
      {
        std::ofstream os(base.string() + ".csv");
        write_summary_csv(os, res);
      }
      if (res.truncated) {
        out << dump_line(json{{"type", "truncated"}, {"completed", res.completed}, {"planned", res.planned}}) << '\n';
        err << "interrupted; partial records written to " << base.string() << ".jsonl\n";
        return kInterrupted;
      }
      out << dump_line(summary_json(res)) << '\n';
      err << "wrote " << base.string() << ".jsonl and " << base.string() << ".csv";
      if (res.checked) err << "; " << res.violations << " violations in " << res.checked << " checks";
      err << '\n';
      return kOk;
    }

    if (*val_cmd) {
      if (!val_config.empty()) {
        std::ifstream in(val_config);
        if (!in) throw UsageError("cannot read " + val_config);
        json raw;
        try {
          raw = json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
          throw ParseError(std::string("config is not valid JSON: ") + e.what());
        }
        auto cfg = config_from_json(raw);
        if (cfg.name.empty()) cfg.name = std::filesystem::path(val_config).stem().string();
        validate_config(cfg, resolve_graph(cfg));
        out << dump_line(json{{"type", "config"}, {"config", to_json(cfg)}}) << '\n';
        err << "config ok\n";
        return kOk;
      }
      if (val_solution.empty()) throw UsageError("give --config or --solution");
      const auto h = val_graph.load();
      const auto inst = val_inst.load();
      std::ifstream in(val_solution);
      if (!in) throw UsageError("cannot read " + val_solution);
      // Accept a bare solution object or any solve/budget record line holding one.
      json sol;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
          throw ParseError(e.what());
        }
        if (j.contains("copies")) sol = j;
        else if (j.contains("solution")) sol = j["solution"];
      }
      if (sol.is_null()) throw ParseError("no solution record found in " + val_solution);
      const auto s = solution_from_json(sol, inst, h);
      auto problems = validate_solution(s, inst, h);
      if (sol.contains("total_weight") && real_from(sol["total_weight"]) != s.total_weight)
        problems.push_back("recorded total weight differs from the recomputed one");
      json pj = json::array();
      for (const auto& p : problems) pj.push_back(p);
      out << dump_line(json{{"type", "validation"}, {"valid", problems.empty()}, {"problems", pj}}) << '\n';
      for (const auto& p : problems) err << p << '\n';
      err << (problems.empty() ? "valid\n" : "invalid\n");
      return problems.empty() ? kOk : kInvalid;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

}  // namespace htile::cli
