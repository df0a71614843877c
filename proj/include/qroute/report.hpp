#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qroute/error.hpp"
#include "qroute/net_model.hpp"

namespace qroute {

inline constexpr const char* kToolName = "qroute";
inline constexpr const char* kToolVersion = "0.1.0";

/// Floats in results are written with 12 significant digits; the config echo
/// uses shortest round-trip form so it parses back to identical inputs.
enum class FloatStyle { kResult, kRoundTrip };

inline std::string format_double(double v, FloatStyle style) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";
  char buf[64];
  if (style == FloatStyle::kRoundTrip) {
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    // keep a float marker so integral values read back as doubles
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
  }
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

inline void write_json_string(std::ostream& out, const std::string& s) {
  out << nlohmann::json(s).dump();
}

inline void write_canonical(std::ostream& out, const nlohmann::json& j, FloatStyle style, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // nlohmann objects iterate in key order
        if (!first) out << ",\n";
        first = false;
        out << pad;
        write_json_string(out, it.key());
        out << ": ";
        const FloatStyle child =
            depth == 0 && (it.key() == "config" || it.key() == "overrides") ? FloatStyle::kRoundTrip : style;
        write_canonical(out, it.value(), child, indent, depth + 1);
      }
      out << "\n" << close_pad << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        write_canonical(out, j[i], style, indent, depth + 1);
      }
      out << "\n" << close_pad << "]";
      return;
    }
    case nlohmann::json::value_t::number_float: out << format_double(j.get<double>(), style); return;
    default: out << j.dump(); return;
  }
}

inline std::string csv_cell(const nlohmann::json& v) {
  std::string s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_number_float()) {
    s = format_double(v.get<double>(), FloatStyle::kResult);
    if (s == "null") s = "";
  } else if (v.is_null()) {
    s = "";
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  return s;
}

}  // namespace detail

/// Sorted-key JSON with fixed float formatting; identical inputs give identical bytes.
inline std::string canonical_json(const nlohmann::json& j, int indent = 2) {
  std::ostringstream out;
  detail::write_canonical(out, j, FloatStyle::kResult, indent, 0);
  out << "\n";
  return out.str();
}

/// One CSV file: a header and rows of scalar cells.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<nlohmann::json>> rows;

  void add(std::vector<nlohmann::json> row) {
    if (row.size() != header.size()) throw InternalError("table '" + name + "' row width mismatch");
    rows.push_back(std::move(row));
  }

  std::string to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + detail::csv_cell(row[i]);
      out += "\n";
    }
    return out;
  }
};

struct Report {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json overrides = nlohmann::json::object();
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
  std::vector<Table> tables;

  nlohmann::json to_json() const {
    return nlohmann::json{{"command", command},
                          {"config", config},
                          {"overrides", overrides},
                          {"seed", seed},
                          {"metadata", metadata},
                          {"results", results},
                          {"tool", {{"name", kToolName}, {"version", kToolVersion}}}};
  }
};

/// Per-edge classical signalling delay and other facts about the graph.
inline nlohmann::json graph_metadata(const NetworkGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  double max_delay = 0.0;
  for (const auto& e : g.edges()) {
    const double delay = classical_delay_ms(e.spec.length_km);
    max_delay = std::max(max_delay, delay);
    edges.push_back({{"u", e.spec.u},
                     {"v", e.spec.v},
                     {"length_km", e.spec.length_km},
                     {"capacity", e.capacity()},
                     {"link_prob", e.link_prob},
                     {"classical_delay_ms", delay}});
  }
  char fp[32];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(g.fingerprint()));
  return nlohmann::json{{"nodes", g.node_count()},
                        {"edge_count", g.edge_count()},
                        {"edges", edges},
                        {"max_classical_delay_ms", max_delay},
                        {"components", g.components().size()},
                        {"graph_fingerprint", fp},
                        {"warnings", g.warnings()}};
}

inline Table edge_metadata_table(const NetworkGraph& g) {
  Table t{"edges", {"u", "v", "capacity", "length_km", "link_prob", "classical_delay_ms"}, {}};
  for (const auto& e : g.edges()) {
    t.add({e.spec.u, e.spec.v, e.capacity(), e.spec.length_km, e.link_prob, classical_delay_ms(e.spec.length_km)});
  }
  return t;
}

/// Writes report.json, or one <table>.csv per table plus report.json for the
/// echo and metadata when csv is requested. Returns the files written.
inline std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& dir,
                                                       bool csv) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + file.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + file.string() + "'");
    written.push_back(file);
  };
  put(dir / "report.json", canonical_json(report.to_json()));
  if (csv) {
    for (const auto& t : report.tables) put(dir / (t.name + ".csv"), t.to_csv());
  }
  return written;
}

}  // namespace qroute
