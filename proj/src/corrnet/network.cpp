#include "corrnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "corrnet/csv.hpp"
#include "corrnet/errors.hpp"

namespace corrnet {

size_t CorrelationNetwork::pair_index(size_t i, size_t j) const {
  if (i > j) std::swap(i, j);
  const size_t n = nodes.size();
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

double CorrelationNetwork::density() const {
  size_t n = nodes.size();
  if (n < 2) return 0.0;
  return double(edges.size()) / (double(n) * double(n - 1) / 2.0);
}

double CorrelationNetwork::global_density() const {
  if (n_defined_pairs == 0) return 0.0;
  return double(edges.size()) / double(n_defined_pairs);
}

std::optional<size_t> CorrelationNetwork::node_index(const std::string& id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  return std::nullopt;
}

namespace {

// Canonical pair naming: the lexicographically smaller asset id first.
std::pair<const std::string*, const std::string*> pair_ids(const CorrelationNetwork& net,
                                                           const Edge& e) {
  const std::string* a = &net.nodes[e.i].id;
  const std::string* b = &net.nodes[e.j].id;
  if (*b < *a) std::swap(a, b);
  return {a, b};
}

void sort_edges_by_ids(CorrelationNetwork& net) {
  std::sort(net.edges.begin(), net.edges.end(), [&](const Edge& x, const Edge& y) {
    auto [xa, xb] = pair_ids(net, x);
    auto [ya, yb] = pair_ids(net, y);
    if (*xa != *ya) return *xa < *ya;
    return *xb < *yb;
  });
}

}  // namespace

CorrelationNetwork build_threshold_network(const CorrelationMatrix& corr, double quantile) {
  if (!(quantile > 0.0) || quantile > 1.0) {
    throw ArgumentError("threshold quantile must lie in (0, 1]");
  }

  const size_t n = corr.n_assets();
  CorrelationNetwork net;
  net.window = corr.window;
  net.nodes = corr.assets;
  net.quantile = quantile;
  net.defined.assign(n < 2 ? 0 : n * (n - 1) / 2, 0);
  net.edge_mask.assign(net.defined.size(), 0);

  struct Candidate {
    uint32_t i, j;
    double rho;
  };
  std::vector<Candidate> candidates;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (corr.defined(i, j)) {
        net.defined[net.pair_index(i, j)] = 1;
        candidates.push_back({uint32_t(i), uint32_t(j), corr.rho_at(i, j)});
      }
    }
  }
  net.n_defined_pairs = candidates.size();
  if (candidates.empty()) {
    throw DataError("window " + corr.window.label() +
                    " has no defined correlation pairs to threshold");
  }

  // Highest rho first; cutoff ties resolved by lexicographic pair ids.
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.rho != b.rho) return a.rho > b.rho;
    const std::string& a1 = corr.assets[a.i].id;
    const std::string& a2 = corr.assets[a.j].id;
    const std::string& b1 = corr.assets[b.i].id;
    const std::string& b2 = corr.assets[b.j].id;
    const std::string& amin = std::min(a1, a2);
    const std::string& amax = std::max(a1, a2);
    const std::string& bmin = std::min(b1, b2);
    const std::string& bmax = std::max(b1, b2);
    if (amin != bmin) return amin < bmin;
    return amax < bmax;
  });

  size_t m = size_t(std::ceil(quantile * double(candidates.size())));
  m = std::min(m, candidates.size());
  for (size_t k = 0; k < m; ++k) {
    const Candidate& c = candidates[k];
    net.edges.push_back({c.i, c.j, c.rho});
    net.edge_mask[net.pair_index(c.i, c.j)] = 1;
  }
  sort_edges_by_ids(net);
  return net;
}

TemporalNetwork stack_temporal(std::vector<CorrelationNetwork> layers) {
  for (size_t t = 1; t < layers.size(); ++t) {
    if (layers[t].window.start < layers[t - 1].window.start) {
      throw ArgumentError("temporal layers must be ordered by window start");
    }
    if (layers[t].window.start < layers[t - 1].window.end) {
      throw ArgumentError("temporal layers overlap: " + layers[t - 1].window.label() + " and " +
                          layers[t].window.label());
    }
  }

  TemporalNetwork net;
  for (size_t t = 0; t + 1 < layers.size(); ++t) {
    std::set<std::string> current;
    for (const auto& node : layers[t].nodes) current.insert(node.id);
    std::set<std::string> shared;
    for (const auto& node : layers[t + 1].nodes) {
      if (current.count(node.id)) shared.insert(node.id);
    }
    for (const auto& id : shared) net.identity_edges.push_back({id, t});
  }
  net.layers = std::move(layers);
  return net;
}

GraphFormat parse_graph_format(const std::string& name) {
  if (name == "edge_list") return GraphFormat::EdgeList;
  if (name == "graphml") return GraphFormat::GraphML;
  if (name == "dot") return GraphFormat::Dot;
  throw ArgumentError("unknown graph format '" + name + "' (expected edge_list, graphml, dot)");
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string layer_node_name(const CorrelationNetwork& layer, const std::string& id) {
  return id + "@" + layer.window.start.to_string();
}

struct NodeRow {
  std::string name;
  const AssetRecord* rec;
};

std::vector<NodeRow> sorted_nodes(const CorrelationNetwork& net, bool layered) {
  std::vector<NodeRow> rows;
  rows.reserve(net.nodes.size());
  for (const auto& node : net.nodes) {
    rows.push_back({layered ? layer_node_name(net, node.id) : node.id, &node});
  }
  std::sort(rows.begin(), rows.end(),
            [](const NodeRow& a, const NodeRow& b) { return a.name < b.name; });
  return rows;
}

void open_graphml(std::ofstream& out, bool with_identity) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"sector_major\" for=\"node\" attr.name=\"sector_major\" attr.type=\"string\"/>\n"
      << "  <key id=\"sector_minor\" for=\"node\" attr.name=\"sector_minor\" attr.type=\"string\"/>\n"
      << "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n"
      << "  <key id=\"rho\" for=\"edge\" attr.name=\"rho\" attr.type=\"double\"/>\n";
  if (with_identity) {
    out << "  <key id=\"identity\" for=\"edge\" attr.name=\"identity\" attr.type=\"boolean\">\n"
        << "    <default>false</default>\n"
        << "  </key>\n";
  }
}

void write_graphml_node(std::ofstream& out, const NodeRow& row) {
  const AssetRecord& rec = *row.rec;
  std::string major = rec.kind == AssetKind::Index ? "Index"
                      : rec.sector               ? rec.sector->majored().to_string()
                                                 : "";
  std::string minor;
  if (rec.sector && rec.sector->minor != SectorMinor::None) {
    minor = rec.sector->to_string().substr(major.size() + 1);
  }
  out << "    <node id=\"" << xml_escape(row.name) << "\">"
      << "<data key=\"sector_major\">" << xml_escape(major) << "</data>"
      << "<data key=\"sector_minor\">" << xml_escape(minor) << "</data>"
      << "<data key=\"kind\">" << (rec.kind == AssetKind::Index ? "Index" : "Stock")
      << "</data></node>\n";
}

void write_dot_node(std::ofstream& out, const NodeRow& row) {
  const AssetRecord& rec = *row.rec;
  std::string major = rec.kind == AssetKind::Index ? "Index"
                      : rec.sector               ? rec.sector->majored().to_string()
                                                 : "";
  std::string minor;
  if (rec.sector && rec.sector->minor != SectorMinor::None) {
    minor = rec.sector->to_string().substr(major.size() + 1);
  }
  out << "  \"" << row.name << "\" [sector_major=\"" << major << "\", sector_minor=\"" << minor
      << "\", kind=\"" << (rec.kind == AssetKind::Index ? "Index" : "Stock") << "\"];\n";
}

void export_edge_list_rows(CsvWriter& w, const CorrelationNetwork& net, bool layered) {
  for (const Edge& e : net.edges) {
    auto [a, b] = pair_ids(net, e);
    std::string na = layered ? layer_node_name(net, *a) : *a;
    std::string nb = layered ? layer_node_name(net, *b) : *b;
    std::vector<std::string> row{na, nb, format_double(e.rho), net.window.start.to_string()};
    if (layered) row.push_back("false");
    w.write_row(row);
  }
}

std::ofstream open_binary(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  return out;
}

}  // namespace

void export_network(const CorrelationNetwork& net, GraphFormat format, const std::string& path) {
  switch (format) {
    case GraphFormat::EdgeList: {
      CsvWriter w(path);
      w.write_row({"asset_i", "asset_j", "rho", "window_start"});
      export_edge_list_rows(w, net, /*layered=*/false);
      w.close();
      return;
    }
    case GraphFormat::GraphML: {
      auto out = open_binary(path);
      open_graphml(out, /*with_identity=*/false);
      out << "  <graph id=\"win_" << net.window.label() << "\" edgedefault=\"undirected\">\n";
      for (const auto& row : sorted_nodes(net, false)) write_graphml_node(out, row);
      for (const Edge& e : net.edges) {
        auto [a, b] = pair_ids(net, e);
        out << "    <edge source=\"" << xml_escape(*a) << "\" target=\"" << xml_escape(*b)
            << "\"><data key=\"rho\">" << format_double(e.rho) << "</data></edge>\n";
      }
      out << "  </graph>\n</graphml>\n";
      if (!out) throw IoError("write failed: " + path);
      return;
    }
    case GraphFormat::Dot: {
      auto out = open_binary(path);
      out << "graph corrnet {\n";
      for (const auto& row : sorted_nodes(net, false)) write_dot_node(out, row);
      for (const Edge& e : net.edges) {
        auto [a, b] = pair_ids(net, e);
        out << "  \"" << *a << "\" -- \"" << *b << "\" [rho=\"" << format_double(e.rho)
            << "\"];\n";
      }
      out << "}\n";
      if (!out) throw IoError("write failed: " + path);
      return;
    }
  }
  throw ArgumentError("unhandled graph format");
}

void export_network(const TemporalNetwork& net, GraphFormat format, const std::string& path) {
  switch (format) {
    case GraphFormat::EdgeList: {
      CsvWriter w(path);
      w.write_row({"asset_i", "asset_j", "rho", "window_start", "identity"});
      for (const auto& layer : net.layers) export_edge_list_rows(w, layer, /*layered=*/true);
      for (const auto& ie : net.identity_edges) {
        const auto& from = net.layers[ie.layer];
        const auto& to = net.layers[ie.layer + 1];
        w.write_row({layer_node_name(from, ie.asset_id), layer_node_name(to, ie.asset_id), "",
                     from.window.start.to_string(), "true"});
      }
      w.close();
      return;
    }
    case GraphFormat::GraphML: {
      auto out = open_binary(path);
      open_graphml(out, /*with_identity=*/true);
      out << "  <graph id=\"temporal\" edgedefault=\"undirected\">\n";
      for (const auto& layer : net.layers) {
        for (const auto& row : sorted_nodes(layer, true)) write_graphml_node(out, row);
      }
      for (const auto& layer : net.layers) {
        for (const Edge& e : layer.edges) {
          auto [a, b] = pair_ids(layer, e);
          out << "    <edge source=\"" << xml_escape(layer_node_name(layer, *a))
              << "\" target=\"" << xml_escape(layer_node_name(layer, *b))
              << "\"><data key=\"rho\">" << format_double(e.rho) << "</data></edge>\n";
        }
      }
      for (const auto& ie : net.identity_edges) {
        const auto& from = net.layers[ie.layer];
        const auto& to = net.layers[ie.layer + 1];
        out << "    <edge source=\"" << xml_escape(layer_node_name(from, ie.asset_id))
            << "\" target=\"" << xml_escape(layer_node_name(to, ie.asset_id))
            << "\"><data key=\"identity\">true</data></edge>\n";
      }
      out << "  </graph>\n</graphml>\n";
      if (!out) throw IoError("write failed: " + path);
      return;
    }
    case GraphFormat::Dot: {
      auto out = open_binary(path);
      out << "graph corrnet_temporal {\n";
      for (const auto& layer : net.layers) {
        for (const auto& row : sorted_nodes(layer, true)) write_dot_node(out, row);
      }
      for (const auto& layer : net.layers) {
        for (const Edge& e : layer.edges) {
          auto [a, b] = pair_ids(layer, e);
          out << "  \"" << layer_node_name(layer, *a) << "\" -- \"" << layer_node_name(layer, *b)
              << "\" [rho=\"" << format_double(e.rho) << "\"];\n";
        }
      }
      for (const auto& ie : net.identity_edges) {
        const auto& from = net.layers[ie.layer];
        const auto& to = net.layers[ie.layer + 1];
        out << "  \"" << layer_node_name(from, ie.asset_id) << "\" -- \""
            << layer_node_name(to, ie.asset_id) << "\" [identity=true];\n";
      }
      out << "}\n";
      if (!out) throw IoError("write failed: " + path);
      return;
    }
  }
  throw ArgumentError("unhandled graph format");
}

CorrelationNetwork load_edge_list(const std::string& path) {
  CsvReader reader(path);
  std::vector<std::string> row;
  if (!reader.next_row(row)) throw ParseError(path + ": empty edge list");
  if (row.size() != 4 || row[0] != "asset_i" || row[1] != "asset_j" || row[2] != "rho" ||
      row[3] != "window_start") {
    throw ParseError(path + ": expected header 'asset_i,asset_j,rho,window_start'");
  }

  struct Row {
    std::string a, b;
    double rho;
  };
  std::vector<Row> rows;
  std::set<std::string> ids;
  std::optional<Date> window_start;
  while (reader.next_row(row)) {
    const std::string where = path + ":" + std::to_string(reader.line_number());
    if (row.size() != 4) throw ParseError(where + ": expected 4 fields");
    Date ws = Date::parse(row[3]);
    if (window_start && *window_start != ws) {
      throw DataError(where + ": mixed window_start values in one edge list");
    }
    window_start = ws;
    rows.push_back({row[0], row[1], parse_double(row[2], where)});
    ids.insert(row[0]);
    ids.insert(row[1]);
  }

  CorrelationNetwork net;
  if (window_start) net.window.start = *window_start;
  for (const auto& id : ids) net.nodes.push_back({id, AssetKind::Stock, std::nullopt});
  const size_t n = net.nodes.size();
  net.defined.assign(n < 2 ? 0 : n * (n - 1) / 2, 0);
  net.edge_mask.assign(net.defined.size(), 0);
  net.quantile = 1.0;
  for (const Row& r : rows) {
    auto i = net.node_index(r.a);
    auto j = net.node_index(r.b);
    size_t lo = std::min(*i, *j), hi = std::max(*i, *j);
    if (lo == hi) throw DataError(path + ": self-loop on asset '" + r.a + "'");
    net.edges.push_back({uint32_t(lo), uint32_t(hi), r.rho});
    net.defined[net.pair_index(lo, hi)] = 1;
    net.edge_mask[net.pair_index(lo, hi)] = 1;
  }
  net.n_defined_pairs = net.edges.size();
  sort_edges_by_ids(net);
  return net;
}

}  // namespace corrnet
