#pragma once

// Mention graph, second-order biased random walks, skip-gram node
// embeddings and the network-view projection.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "yun/autodiff.hpp"
#include "yun/records.hpp"
#include "yun/rng.hpp"

namespace yun {

using NodeId = std::size_t;
using Edge = std::pair<std::string, std::string>;

/// Undirected, unweighted, simple graph. Nodes are ordered by name so the
/// structure does not depend on input order.
class MentionGraph {
 public:
  MentionGraph() = default;

  /// One node per dataset user and per mentioned id; an edge when either
  /// side mentions the other. Self-mentions and repeats are ignored.
  static MentionGraph build(std::span<const UserRecord> records, std::span<const Edge> extra_edges = {});
  static MentionGraph from_edges(std::vector<std::string> nodes, std::span<const Edge> edges);

  std::size_t num_nodes() const { return names_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::string& name(NodeId n) const { return names_.at(n); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<NodeId> find(std::string_view name) const;
  /// Sorted neighbor ids.
  std::span<const NodeId> neighbors(NodeId n) const { return adjacency_.at(n); }
  std::size_t degree(NodeId n) const { return adjacency_.at(n).size(); }
  bool has_edge(NodeId a, NodeId b) const;
  /// (smaller id, larger id), sorted.
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }

  void save(const std::filesystem::path& path) const;
  static MentionGraph load(const std::filesystem::path& path);

  friend bool operator==(const MentionGraph& a, const MentionGraph& b) {
    return a.names_ == b.names_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
};

/// "id_a<TAB>id_b" per line.
std::vector<Edge> read_edge_list(const std::filesystem::path& path);

struct WalkConfig {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 80;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  std::uint64_t seed = 1;

  void validate() const;
};

using Walk = std::vector<NodeId>;

/// walks_per_node walks from every node, ordered round by round. Each
/// source node draws from its own (seed, node) stream.
std::vector<Walk> generate_walks(const MentionGraph& graph, const WalkConfig& config);

struct SkipGramConfig {
  std::size_t dim = 300;
  std::size_t window = 10;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
};

struct NodeEmbeddingTable {
  std::vector<std::string> names;
  Tensor vectors;  // num_nodes x dim
  Tensor context;  // training-only output vectors
  std::vector<double> epoch_loss;

  std::size_t dim() const { return vectors.cols(); }
  std::optional<std::size_t> row(std::string_view name) const;
  /// The node's vector, or zeros when the node is absent.
  Tensor vector_or_zero(std::string_view name) const;

 private:
  friend NodeEmbeddingTable make_node_table(std::vector<std::string>, Tensor, Tensor);
  std::unordered_map<std::string, std::size_t> index_;
};

NodeEmbeddingTable make_node_table(std::vector<std::string> names, Tensor vectors, Tensor context = {});

/// Called after each epoch with the epoch's mean negative-sampling loss.
using EpochHook = std::function<void(std::size_t epoch, const NodeEmbeddingTable&)>;

/// Skip-gram with negative sampling over (center, context) pairs within the
/// window; negatives follow walk frequency^0.75. Learning rate decays
/// linearly. Throws if no walk has length >= 2.
NodeEmbeddingTable train_node_embeddings(std::span<const Walk> walks, const std::vector<std::string>& names,
                                         const SkipGramConfig& config, const EpochHook& hook = {});

struct NetProjection {
  Parameter w;  // node_dim x out_dim
  Parameter b;  // 1 x out_dim

  std::size_t out_dim() const { return w.value.cols(); }
  std::vector<Parameter*> parameters() { return {&w, &b}; }
  static NetProjection init(std::size_t node_dim, std::size_t out_dim, Rng& rng, const std::string& name);
};

/// relu(E W + b) for a 1 x node_dim embedding row.
Var net_view(Tape& tape, const Tensor& embedding, const NetProjection& proj);

double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace yun
