#include "roadtrace/graph_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace roadtrace {

using nlohmann::json;

namespace {

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

double number_field(const json &v, const std::string &where) {
  if (!v.is_number()) throw FormatError(where + ": expected a number");
  return v.get<double>();
}

std::size_t index_field(const json &v, const std::string &where) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw FormatError(where + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

std::string graph_to_json(const RoadGraph &g, std::string_view provenance_json) {
  json doc;
  doc["format"] = "roadgraph-v1";
  doc["width"] = g.width;
  doc["height"] = g.height;
  json vertices = json::array();
  for (const Point2 &p : g.vertices()) vertices.push_back({p.x(), p.y()});
  json edges = json::array();
  for (const Edge &e : g.edges()) edges.push_back({e.a, e.b});
  doc["vertices"] = std::move(vertices);
  doc["edges"] = std::move(edges);
  if (!provenance_json.empty()) doc["provenance"] = json::parse(provenance_json);
  return doc.dump();
}

RoadGraph graph_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &err) {
    throw FormatError("line " + std::to_string(line_of(text, err.byte)) + ": " + err.what());
  }
  if (!doc.is_object()) throw FormatError("top level: expected an object");
  if (!doc.contains("format") || doc["format"] != "roadgraph-v1")
    throw FormatError("format: expected \"roadgraph-v1\"");
  if (!doc.contains("vertices") || !doc["vertices"].is_array())
    throw FormatError("vertices: expected an array");
  if (!doc.contains("edges") || !doc["edges"].is_array())
    throw FormatError("edges: expected an array");

  std::vector<Point2> vertices;
  const json &vs = doc["vertices"];
  vertices.reserve(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const std::string where = "vertices[" + std::to_string(i) + "]";
    if (!vs[i].is_array() || vs[i].size() != 2) throw FormatError(where + ": expected [x, y]");
    vertices.emplace_back(number_field(vs[i][0], where), number_field(vs[i][1], where));
    if (!vertices.back().allFinite()) throw FormatError(where + ": non-finite coordinate");
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const json &es = doc["edges"];
  edges.reserve(es.size());
  for (std::size_t e = 0; e < es.size(); ++e) {
    const std::string where = "edges[" + std::to_string(e) + "]";
    if (!es[e].is_array() || es[e].size() != 2) throw FormatError(where + ": expected [i, j]");
    const std::size_t i = index_field(es[e][0], where);
    const std::size_t j = index_field(es[e][1], where);
    if (i >= vertices.size() || j >= vertices.size())
      throw FormatError(where + ": vertex index out of range (" +
                        std::to_string(vertices.size()) + " vertices)");
    edges.emplace_back(i, j);
  }
  RoadGraph g(std::move(vertices), edges);
  if (doc.contains("width")) g.width = static_cast<int>(number_field(doc["width"], "width"));
  if (doc.contains("height")) g.height = static_cast<int>(number_field(doc["height"], "height"));
  return g;
}

void save_graph(const RoadGraph &g, const std::filesystem::path &path, std::string_view provenance_json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << graph_to_json(g, provenance_json) << '\n';
}

RoadGraph load_graph(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return graph_from_json(buf.str());
  } catch (const FormatError &err) {
    throw FormatError(path.string() + ": " + err.what());
  }
}

}  // namespace roadtrace
