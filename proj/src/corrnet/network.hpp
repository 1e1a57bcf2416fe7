#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrnet/corrwin.hpp"
#include "corrnet/dates.hpp"
#include "corrnet/ingest.hpp"

namespace corrnet {

constexpr double kDefaultQuantile = 0.0625;

struct Edge {
  uint32_t i = 0;  // node indices, i < j
  uint32_t j = 0;
  double rho = 0.0;
};

/// Thresholded correlation graph for one window: the ceil(quantile * P)
/// highest-correlation defined pairs, P = number of defined pairs.
struct CorrelationNetwork {
  DateWindow window;
  std::vector<AssetRecord> nodes;
  std::vector<Edge> edges;        // sorted by (id_i, id_j)
  std::vector<uint8_t> defined;   // upper-triangle mask of defined pairs
  std::vector<uint8_t> edge_mask; // upper-triangle mask of edges
  size_t n_defined_pairs = 0;
  double quantile = kDefaultQuantile;

  size_t n_nodes() const { return nodes.size(); }
  size_t pair_index(size_t i, size_t j) const;
  bool pair_defined(size_t i, size_t j) const { return defined[pair_index(i, j)] != 0; }
  bool has_edge(size_t i, size_t j) const { return edge_mask[pair_index(i, j)] != 0; }

  /// |edges| over all unordered node pairs.
  double density() const;
  /// |edges| over defined pairs; the base rate for index-linkage tests.
  double global_density() const;

  std::optional<size_t> node_index(const std::string& id) const;
};

CorrelationNetwork build_threshold_network(const CorrelationMatrix& corr, double quantile);

/// Yearly layers joined by identity edges: one per asset present in two
/// consecutive layers.
struct TemporalNetwork {
  struct IdentityEdge {
    std::string asset_id;
    size_t layer = 0;  // connects `layer` to `layer + 1`
  };
  std::vector<CorrelationNetwork> layers;
  std::vector<IdentityEdge> identity_edges;
};

/// Layers must be ordered by window start and non-overlapping.
TemporalNetwork stack_temporal(std::vector<CorrelationNetwork> layers);

enum class GraphFormat { EdgeList, GraphML, Dot };

GraphFormat parse_graph_format(const std::string& name);

void export_network(const CorrelationNetwork& net, GraphFormat format, const std::string& path);
void export_network(const TemporalNetwork& net, GraphFormat format, const std::string& path);

/// Reads an edge-list CSV back into a network (nodes are the union of the
/// edge endpoints; sector labels are not part of that format).
CorrelationNetwork load_edge_list(const std::string& path);

}  // namespace corrnet
