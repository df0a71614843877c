#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "qroute/report.hpp"
#include "qroute/scenario.hpp"

using namespace qroute;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_scenario_text(text, "s.json");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"({"version": 1, "nodes": [{"id": "A"}, {"id": "B"}],
  "edges": [{"u": "A", "v": "B", "capacity": 1, "link_prob": 0.5}]})";

}  // namespace

TEST(Scenario, MinimalGetsDefaults) {
  const auto s = parse_scenario_text(kMinimal);
  EXPECT_EQ(s.nodes.size(), 2u);
  EXPECT_EQ(s.edges.size(), 1u);
  EXPECT_TRUE(s.requests.empty());
  EXPECT_DOUBLE_EQ(s.nodes[0].swap_prob, 0.5);
  EXPECT_EQ(s.nodes[0].memory_cutoff_slots, 1);
  EXPECT_DOUBLE_EQ(s.elementary_fidelity, 1.0);
  EXPECT_EQ(s.routing.policy, SwapPolicy::doubling());
  EXPECT_EQ(s.simulation.slots, 1000);
  EXPECT_EQ(s.simulation.forwarding, Forwarding::kSync);
  EXPECT_EQ(s.graph().edge_count(), 1u);
}

TEST(Scenario, NegativeCapacityNamesEdge) {
  const auto msg = error_of(R"({"version": 1, "nodes": [{"id": "A"}, {"id": "B"}],
    "edges": [{"u": "A", "v": "B", "capacity": -1}]})");
  EXPECT_NE(msg.find("A-B"), std::string::npos) << msg;
}

TEST(Scenario, UnknownDestNamesRequest) {
  const auto msg = error_of(R"({"version": 1, "nodes": [{"id": "A"}, {"id": "B"}],
    "edges": [{"u": "A", "v": "B"}],
    "requests": [{"id": "req-7", "source": "A", "dest": "Q"}]})");
  EXPECT_NE(msg.find("req-7"), std::string::npos) << msg;
  EXPECT_NE(msg.find("Q"), std::string::npos) << msg;
}

TEST(Scenario, DiagnosticsPointAtProblems) {
  EXPECT_NE(error_of("{\"version\": 1,\n  \"nodes\": [,]}").find("s.json:2:"), std::string::npos);
  EXPECT_NE(error_of(R"({"version": 2})").find("version"), std::string::npos);
  EXPECT_NE(error_of(R"({"nodes": []})").find("version"), std::string::npos);
  EXPECT_NE(error_of(R"({"version": 1, "edgez": []})").find("edgez"), std::string::npos);
  EXPECT_NE(error_of(R"({"version": 1, "nodes": [{"id": "A", "swap_prob": "high"}]})").find("nodes[0].swap_prob"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"version": 1, "nodes": [{"id": "A"}], "simulation": {"mode": "fast"}})").find("fast"),
            std::string::npos);
  EXPECT_NE(error_of(R"j({"version": 1, "nodes": [{"id": "A"}, {"id": "B"}], "edges": [{"u": "A", "v": "B"}],
    "analysis": [{"name": "p", "nodes": ["A", "B"], "policies": ["((0 1) 2)"]}]})j")
                .find("analysis 'p'"),
            std::string::npos);
  EXPECT_THROW(parse_scenario("/nonexistent/file.json"), ValidationError);
}

TEST(Scenario, GridExpands) {
  const auto s = parse_scenario_text(R"({"version": 1,
    "grid": {"rows": 3, "cols": 3, "edge": {"capacity": 2, "length_km": 5}, "node": {"swap_prob": 0.4}}})");
  EXPECT_EQ(s.nodes.size(), 9u);
  EXPECT_EQ(s.edges.size(), 12u);
  EXPECT_EQ(s.edges[0].capacity, 2);
  EXPECT_DOUBLE_EQ(s.nodes[4].swap_prob, 0.4);
}

TEST(Scenario, JsonRoundTrip) {
  const auto s = parse_scenario_text(R"({"version": 1,
    "physical": {"attenuation_per_km": 0.05, "elementary_fidelity": 0.97, "swap_prob_check": "advanced"},
    "nodes": [{"id": "A"}, {"id": "B", "swap_prob": 0.3, "memory_cutoff_slots": 4}, {"id": "C"}],
    "edges": [{"u": "A", "v": "B", "capacity": 2, "length_km": 12.5},
              {"u": "B", "v": "C", "capacity": 1, "link_prob": 0.1}],
    "requests": [{"id": "r", "source": "A", "dest": "C", "rate": 0.25, "min_fidelity": 0.9}],
    "analysis": [{"name": "ABC", "nodes": ["A", "B", "C"], "widths": [1, 1],
                  "policies": ["parallel", {"tree": [0, 1]}], "order_search": true}],
    "routing": {"k": 2, "metric": "hop_count", "policy": "sequential",
                "utility": {"kind": "weighted", "weights": {"r": 3}}},
    "simulation": {"scheme": "proactive", "mode": "async", "policy": "adhoc", "slots": 50, "seed": 9,
                   "node_disjoint": true, "max_paths": 2},
    "output": {"format": "csv"}})");
  const auto again = scenario_from_json(scenario_to_json(s));
  EXPECT_TRUE(again == s);
  EXPECT_EQ(canonical_json(scenario_to_json(again)), canonical_json(scenario_to_json(s)));
  // Through the text form as written into reports.
  Report rep;
  rep.config = scenario_to_json(s);
  const auto text = canonical_json(rep.to_json());
  const auto reparsed = nlohmann::json::parse(text);
  EXPECT_TRUE(scenario_from_json(reparsed.at("config")) == s);
}

TEST(Report, FloatFormatting) {
  EXPECT_EQ(format_double(0.1, FloatStyle::kResult), "0.1");
  EXPECT_EQ(format_double(1.0 / 3.0, FloatStyle::kResult), "0.333333333333");
  EXPECT_EQ(format_double(1.0 / 3.0, FloatStyle::kRoundTrip), "0.3333333333333333");
  EXPECT_EQ(format_double(2.0, FloatStyle::kRoundTrip), "2.0");
  EXPECT_EQ(format_double(0.0, FloatStyle::kResult), "0");
  EXPECT_EQ(format_double(std::nan(""), FloatStyle::kResult), "null");
}

TEST(Report, DistributionCsv) {
  Table t{"dist", {"k", "prob"}, {}};
  t.add({0, 0.25});
  t.add({1, 0.5});
  t.add({2, 0.25});
  EXPECT_EQ(t.to_csv(), "k,prob\n0,0.25\n1,0.5\n2,0.25\n");
  EXPECT_THROW(t.add({1}), InternalError);
  Table quoted{"q", {"name"}, {}};
  quoted.add({"a,b"});
  EXPECT_EQ(quoted.to_csv(), "name\n\"a,b\"\n");
}

TEST(Report, EmptyTableKeepsHeader) {
  Table t{"sim_lanes", {"lane", "request", "delivered"}, {}};
  EXPECT_EQ(t.to_csv(), "lane,request,delivered\n");
}

TEST(Report, CanonicalBytesAreStable) {
  Report rep;
  rep.command = "analyze";
  rep.results = {{"zeta", 1.0 / 3.0}, {"alpha", {1, 2.5, "x"}}, {"empty", nlohmann::json::object()}};
  rep.config = {{"value", 0.1 + 0.2}};
  const auto a = canonical_json(rep.to_json());
  const auto b = canonical_json(rep.to_json());
  EXPECT_EQ(a, b);
  EXPECT_LT(a.find("\"alpha\""), a.find("\"zeta\""));
  EXPECT_NE(a.find("0.333333333333\n"), std::string::npos);
  EXPECT_NE(a.find("0.30000000000000004"), std::string::npos);
}

TEST(Report, WritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "qroute_report_test";
  std::filesystem::remove_all(dir);
  Report rep;
  rep.tables.push_back({"dist", {"k", "prob"}, {{0, 1.0}}});
  const auto files = write_report(rep, dir, true);
  ASSERT_EQ(files.size(), 2u);
  std::ifstream in(dir / "dist.csv");
  std::string csv((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(csv, "k,prob\n0,1\n");
  std::filesystem::remove_all(dir);
}

TEST(Report, DelayMetadata) {
  const auto g = build_graph({{"A"}, {"B"}, {"C"}}, {{"A", "B", 1, 20.0, 0.5}, {"B", "C", 1, 20.0, 0.5}}, {});
  const auto meta = graph_metadata(g);
  EXPECT_NEAR(meta.at("edges")[0].at("classical_delay_ms").get<double>(), 0.1, 1e-15);
  EXPECT_NEAR(meta.at("max_classical_delay_ms").get<double>(), 0.1, 1e-15);
  const auto t = edge_metadata_table(g);
  EXPECT_EQ(t.to_csv(), "u,v,capacity,length_km,link_prob,classical_delay_ms\nA,B,1,20,0.5,0.1\nB,C,1,20,0.5,0.1\n");
}
