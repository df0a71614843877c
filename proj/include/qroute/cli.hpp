#pragma once

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qroute/analytics.hpp"
#include "qroute/montecarlo.hpp"
#include "qroute/oracle.hpp"
#include "qroute/report.hpp"
#include "qroute/routing.hpp"
#include "qroute/scenario.hpp"

namespace qroute {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Flags shared by every subcommand. Unset options leave the scenario as is.
struct CliOptions {
  std::string command;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> slots;
  std::optional<std::string> policy;
  std::optional<std::string> mode;
  std::optional<std::string> scheme;
  std::optional<std::string> format;
  std::optional<std::string> out;
};

namespace detail {

using nlohmann::json;

inline json distribution_json(const Distribution& d) {
  json arr = json::array();
  for (double p : d.pmf()) arr.push_back(p);
  return arr;
}

inline json path_json(const PathSpec& p) {
  return json{{"nodes", p.nodes},
              {"hops", p.hops()},
              {"widths", p.per_hop_capacity},
              {"link_probs", p.per_hop_prob},
              {"swap_probs", p.interior_swap_probs}};
}

inline std::string join_nodes(const std::vector<std::string>& nodes) {
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += (i ? ">" : "") + nodes[i];
  return s;
}

inline std::string file_safe(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out;
}

inline PathSpec analysis_path(const NetworkGraph& g, const AnalysisTarget& a) {
  PathSpec p = make_path(g, a.nodes);
  if (a.widths) p.per_hop_capacity = *a.widths;
  p.validate();
  return p;
}

/// Analysis targets from the scenario, or one hop-count shortest path per
/// request when the scenario lists none.
inline std::vector<std::pair<AnalysisTarget, PathSpec>> analysis_targets(const Scenario& s, const NetworkGraph& g) {
  std::vector<std::pair<AnalysisTarget, PathSpec>> out;
  for (const auto& a : s.analysis) out.emplace_back(a, analysis_path(g, a));
  if (s.analysis.empty()) {
    for (const auto& r : s.requests) {
      auto p = shortest_path(g, r.source, r.dest, Metric::kHopCount);
      if (!p) continue;
      AnalysisTarget a;
      a.name = r.id;
      a.nodes = p->nodes;
      a.policies = {SwapPolicy::parallel(), SwapPolicy::sequential(), SwapPolicy::doubling()};
      out.emplace_back(std::move(a), std::move(*p));
    }
  }
  return out;
}

inline void run_analyze(const Scenario& s, const NetworkGraph& g, Report& rep) {
  Table summary{"analysis", {"target", "policy", "hops", "width", "ext", "end_to_end_fidelity"}, {}};
  Table orders{"order_search", {"target", "best_order", "ext", "trees_enumerated"}, {}};
  json paths = json::array();
  for (const auto& [target, path] : analysis_targets(s, g)) {
    json entry = path_json(path);
    entry["name"] = target.name;
    const double fidelity = werner_fidelity_after_swaps(s.elementary_fidelity, path.hops());
    entry["end_to_end_fidelity"] = fidelity;
    json results = json::array();
    for (const auto& policy : target.policies) {
      const Distribution d = path_distribution(path, policy);
      const double ext = expected_throughput(d);
      results.push_back({{"policy", policy.name()}, {"ext", ext}, {"distribution", distribution_json(d)}});
      summary.add({target.name, policy.name(), path.hops(), path.width(), ext, fidelity});
      Table dist{"distribution_" + file_safe(target.name) + "_" + file_safe(policy.name()), {"k", "prob"}, {}};
      for (std::size_t k = 0; k < d.pmf().size(); ++k) dist.add({k, d.pmf()[k]});
      rep.tables.push_back(std::move(dist));
    }
    entry["policies"] = std::move(results);
    if (target.order_search) {
      const auto best = optimal_order_search(path);
      entry["order_search"] = {
          {"best_order", best.best.to_string()}, {"ext", best.ext}, {"trees_enumerated", best.trees_enumerated}};
      orders.add({target.name, best.best.to_string(), best.ext, best.trees_enumerated});
    }
    paths.push_back(std::move(entry));
  }
  rep.results["paths"] = std::move(paths);
  rep.tables.insert(rep.tables.begin(), std::move(summary));
  if (!orders.rows.empty()) rep.tables.push_back(std::move(orders));
}

inline void describe_plan(const Scenario& s, const NetworkGraph& g, const AllocationPlan& plan, Report& rep) {
  Table paths_t{"plan", {"request", "path", "nodes", "width", "policy", "ext"}, {}};
  Table req_t{"requests", {"request", "feasible", "hop_limit", "throughput", "utility", "reason"}, {}};
  Table res_t{"residual", {"u", "v", "capacity", "residual"}, {}};
  json reqs = json::array();
  for (const auto& ra : plan.requests) {
    json paths = json::array();
    for (std::size_t i = 0; i < ra.paths.size(); ++i) {
      const auto& ap = ra.paths[i];
      const double ext = path_ext(ap);
      json pj = path_json(ap.path);
      pj["policy"] = ap.policy.name();
      pj["width"] = ap.path.width();
      pj["ext"] = ext;
      paths.push_back(std::move(pj));
      paths_t.add({ra.request.id, i, join_nodes(ap.path.nodes), ap.path.width(), ap.policy.name(), ext});
    }
    const double thr = ra.feasible ? request_throughput(plan, ra.request.id) : 0.0;
    const double util = ra.feasible ? s.routing.utility.apply(ra.request, thr) : 0.0;
    const json hop_limit = ra.hop_limit == kUnboundedHops ? json(nullptr) : json(ra.hop_limit);
    reqs.push_back({{"id", ra.request.id},
                    {"feasible", ra.feasible},
                    {"reason", ra.reason},
                    {"hop_limit", hop_limit},
                    {"throughput", thr},
                    {"utility", util},
                    {"paths", std::move(paths)}});
    req_t.add({ra.request.id, ra.feasible, hop_limit, thr, util, ra.reason});
  }
  json residual = json::array();
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edge(static_cast<int>(e));
    residual.push_back({{"u", edge.spec.u},
                        {"v", edge.spec.v},
                        {"capacity", edge.capacity()},
                        {"residual", plan.residual_capacity[e]}});
    res_t.add({edge.spec.u, edge.spec.v, edge.capacity(), plan.residual_capacity[e]});
  }
  rep.results["requests"] = std::move(reqs);
  rep.results["residual"] = std::move(residual);
  rep.results["total_utility"] = total_utility(plan, s.routing.utility);
  rep.results["utility_trace"] = plan.utility_trace;
  rep.tables.push_back(std::move(req_t));
  rep.tables.push_back(std::move(paths_t));
  rep.tables.push_back(std::move(res_t));
}

inline void run_route(const Scenario& s, const NetworkGraph& g, Report& rep) {
  const auto plan = allocate(g, s.requests, s.routing_config());
  describe_plan(s, g, plan, rep);
}

inline void run_simulate(const Scenario& s, const NetworkGraph& g, Report& rep) {
  const SimConfig config = s.sim_config();
  SimStats stats;
  std::optional<AllocationPlan> plan;
  if (config.scheme == RoutingScheme::kProactive) {
    plan = allocate(g, s.requests, s.routing_config());
    stats = simulate(g, *plan, config);
  } else {
    stats = simulate(g, s.requests, config);
  }

  Table lanes_t{"sim_lanes", {"lane", "request", "nodes", "policy", "width", "delivered", "rate", "analytic_ext"}, {}};
  Table hist_t{"sim_histogram", {"lane", "k", "slots", "empirical"}, {}};
  Table req_t{"sim_requests", {"request", "delivered", "rate"}, {}};
  Table swaps_t{"sim_swaps", {"policy", "attempts", "successes"}, {}};
  const double slots = static_cast<double>(stats.slots_run);

  // Analytic comparison is exact only for synchronous proactive lanes.
  std::vector<std::optional<PathSpec>> lane_paths(stats.lanes.size());
  if (plan) {
    std::size_t i = 0;
    for (const auto& ra : plan->requests) {
      for (const auto& ap : ra.paths) lane_paths[i++] = ap.path;
    }
  }
  json lanes = json::array();
  for (std::size_t i = 0; i < stats.lanes.size(); ++i) {
    const auto& ls = stats.lanes[i];
    const double rate = slots > 0 ? static_cast<double>(ls.delivered) / slots : 0.0;
    json analytic = nullptr;
    const auto policy = SwapPolicy::parse(ls.policy);
    if (lane_paths[i] && config.forwarding == Forwarding::kSync && policy.kind != PolicyKind::kAdHoc) {
      analytic = expected_throughput(path_distribution(*lane_paths[i], policy));
    }
    json hist = json::array();
    for (std::size_t k = 0; k < ls.histogram.size(); ++k) {
      hist.push_back(ls.histogram[k]);
      hist_t.add({i, k, ls.histogram[k], slots > 0 ? static_cast<double>(ls.histogram[k]) / slots : 0.0});
    }
    lanes.push_back({{"request", ls.request_id},
                     {"nodes", ls.nodes},
                     {"policy", ls.policy},
                     {"width", ls.width},
                     {"delivered", ls.delivered},
                     {"rate", rate},
                     {"analytic_ext", analytic},
                     {"histogram", std::move(hist)}});
    lanes_t.add({i, ls.request_id, join_nodes(ls.nodes), ls.policy, ls.width, ls.delivered, rate, analytic});
  }
  json per_request = json::object();
  for (const auto& [id, n] : stats.delivered_per_request) {
    const double rate = slots > 0 ? static_cast<double>(n) / slots : 0.0;
    per_request[id] = {{"delivered", n}, {"rate", rate}};
    req_t.add({id, n, rate});
  }
  json swaps = json::object();
  for (const auto& [name, c] : stats.swaps_by_policy) {
    swaps[name] = {{"attempts", c.attempts}, {"successes", c.successes}};
    swaps_t.add({name, c.attempts, c.successes});
  }
  rep.results = {{"scheme", scheme_name(config.scheme)},
                 {"mode", forwarding_name(config.forwarding)},
                 {"slots", stats.slots_run},
                 {"lanes", std::move(lanes)},
                 {"requests", std::move(per_request)},
                 {"swaps", std::move(swaps)},
                 {"records",
                  {{"created", stats.links_created},
                   {"swapped", stats.records_swapped},
                   {"delivered", stats.records_delivered},
                   {"expired", stats.records_expired},
                   {"discarded", stats.records_discarded}}},
                 {"warnings", stats.warnings}};
  rep.tables.push_back(std::move(req_t));
  rep.tables.push_back(std::move(lanes_t));
  rep.tables.push_back(std::move(hist_t));
  rep.tables.push_back(std::move(swaps_t));
}

inline void run_oracle(const Scenario& s, const NetworkGraph& g, Report& rep) {
  Table t{"oracle", {"target", "policy", "max_abs_diff", "agrees"}, {}};
  json rows = json::array();
  for (const auto& [target, path] : analysis_targets(s, g)) {
    for (const auto& policy : target.policies) {
      const Distribution analytic = path_distribution(path, policy);
      const SwapSemantics semantics =
          policy.kind == PolicyKind::kParallel ? SwapSemantics{Unheralded{}} : SwapSemantics{policy.tree_for(path.hops())};
      const Distribution exact = brute_force_distribution(path, semantics);
      const double diff = max_abs_diff(analytic, exact);
      const bool agrees = diff <= kDistributionEqualityTolerance;
      rows.push_back({{"target", target.name},
                      {"policy", policy.name()},
                      {"analytic", distribution_json(analytic)},
                      {"brute_force", distribution_json(exact)},
                      {"max_abs_diff", diff},
                      {"agrees", agrees}});
      t.add({target.name, policy.name(), diff, agrees});
    }
  }
  rep.results["comparisons"] = std::move(rows);
  rep.results["tolerance"] = kDistributionEqualityTolerance;
  rep.tables.push_back(std::move(t));
}

inline void apply_overrides(const CliOptions& o, Scenario& s, nlohmann::json& echo) {
  if (o.seed) {
    s.simulation.seed = *o.seed;
    echo["seed"] = *o.seed;
  }
  if (o.slots) {
    s.simulation.slots = *o.slots;
    echo["slots"] = *o.slots;
  }
  if (o.mode) {
    s.simulation.forwarding = parse_forwarding(*o.mode);
    echo["mode"] = *o.mode;
  }
  if (o.scheme) {
    s.simulation.scheme = parse_scheme(*o.scheme);
    echo["scheme"] = *o.scheme;
  }
  if (o.policy) {
    const SwapPolicy p = SwapPolicy::parse(*o.policy);
    if (o.command == "analyze" || o.command == "oracle") {
      for (auto& a : s.analysis) a.policies = {p};
    } else if (o.command == "route") {
      s.routing.policy = p;
    } else {
      s.simulation.policy = p;
      s.routing.policy = p;
    }
    echo["policy"] = *o.policy;
  }
  if (o.format) {
    if (*o.format == "json") {
      s.format = OutputFormat::kJson;
    } else if (*o.format == "csv") {
      s.format = OutputFormat::kCsv;
    } else {
      throw ValidationError("--format must be json or csv");
    }
  }
  validate_scenario(s);
}

}  // namespace detail

/// Builds the report for one subcommand on an already-parsed scenario.
inline Report build_report(const CliOptions& options, Scenario scenario) {
  Report rep;
  rep.command = options.command;
  detail::apply_overrides(options, scenario, rep.overrides);
  // --policy for analyze without explicit targets applies to derived ones too
  const NetworkGraph g = scenario.graph();
  rep.config = scenario_to_json(scenario);
  rep.seed = scenario.simulation.seed;
  rep.metadata = graph_metadata(g);
  rep.metadata["elementary_fidelity"] = scenario.elementary_fidelity;
  rep.tables.push_back(edge_metadata_table(g));
  if (options.command == "analyze") {
    if (options.policy && scenario.analysis.empty()) {
      Scenario derived = scenario;
      for (auto& [t, p] : detail::analysis_targets(scenario, g)) {
        t.policies = {SwapPolicy::parse(*options.policy)};
        derived.analysis.push_back(t);
      }
      detail::run_analyze(derived, g, rep);
    } else {
      detail::run_analyze(scenario, g, rep);
    }
  } else if (options.command == "route") {
    detail::run_route(scenario, g, rep);
  } else if (options.command == "simulate") {
    detail::run_simulate(scenario, g, rep);
  } else if (options.command == "oracle") {
    detail::run_oracle(scenario, g, rep);
  } else {
    throw ValidationError("unknown command '" + options.command + "'");
  }
  return rep;
}

/// Full command-line entry point. Returns 0 on success, 1 for usage or
/// validation errors, 2 for runtime failures.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entanglement routing for quantum repeater networks", kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1, 1);
  CliOptions o;
  std::uint64_t seed = 0;
  std::int64_t slots = 0;
  std::string policy, mode, scheme, format, out_dir;

  struct Spec {
    const char* name;
    const char* help;
  };
  const Spec specs[] = {{"analyze", "Closed-form throughput distributions for paths"},
                        {"route", "Greedy multi-path allocation for the scenario's requests"},
                        {"simulate", "Slot-by-slot Monte Carlo simulation"},
                        {"oracle", "Compare closed forms against brute-force enumeration"}};
  std::vector<CLI::App*> subs;
  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
    sub->add_option("--format", format, "Output format: json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out_dir, "Output directory (json goes to stdout when omitted)");
    sub->add_option("--policy", policy, "Swap policy: sequential, doubling, parallel, adhoc, or a tree like ((0 1) 2)");
    if (std::string(spec.name) == "simulate") {
      sub->add_option("--seed", seed, "Random seed");
      sub->add_option("--slots", slots, "Number of time slots")->check(CLI::PositiveNumber);
      sub->add_option("--mode", mode, "Forwarding: sync or async")->check(CLI::IsMember({"sync", "async"}));
      sub->add_option("--scheme", scheme, "Routing scheme: proactive or reactive")
          ->check(CLI::IsMember({"proactive", "reactive"}));
    }
    subs.push_back(sub);
  }

  std::vector<std::string> argv_store{kToolName};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  for (auto* sub : subs) {
    if (!sub->parsed()) continue;
    o.command = sub->get_name();
    auto given = [sub](const char* name) {
      const auto* opt = sub->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    if (given("--seed")) o.seed = seed;
    if (given("--slots")) o.slots = slots;
    if (given("--policy")) o.policy = policy;
    if (given("--mode")) o.mode = mode;
    if (given("--scheme")) o.scheme = scheme;
    if (given("--format")) o.format = format;
    if (given("--out")) o.out = out_dir;
  }

  try {
    const Report rep = build_report(o, parse_scenario(o.scenario));
    const bool csv = o.format ? *o.format == "csv" : rep.config.at("output").at("format") == "csv";
    if (o.out) {
      write_report(rep, *o.out, csv);
    } else if (csv) {
      throw ValidationError("csv output needs --out");
    } else {
      out << canonical_json(rep.to_json());
    }
    for (const auto& w : rep.metadata.at("warnings")) err << "warning: " << w.get<std::string>() << "\n";
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace qroute
