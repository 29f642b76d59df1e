#include "yun/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "yun/errors.hpp"

namespace yun {

// MentionGraph

MentionGraph MentionGraph::from_edges(std::vector<std::string> nodes, std::span<const Edge> edges) {
  std::set<std::string> names(std::make_move_iterator(nodes.begin()), std::make_move_iterator(nodes.end()));
  for (const auto& [a, b] : edges) {
    names.insert(a);
    names.insert(b);
  }
  MentionGraph g;
  g.names_.assign(names.begin(), names.end());
  for (std::size_t i = 0; i < g.names_.size(); ++i) g.index_.emplace(g.names_[i], i);
  g.adjacency_.resize(g.names_.size());

  std::set<std::pair<NodeId, NodeId>> unique;
  for (const auto& [a, b] : edges) {
    NodeId x = g.index_.at(a), y = g.index_.at(b);
    if (x == y) continue;
    if (x > y) std::swap(x, y);
    unique.emplace(x, y);
  }
  g.edges_.assign(unique.begin(), unique.end());
  for (const auto& [x, y] : g.edges_) {
    g.adjacency_[x].push_back(y);
    g.adjacency_[y].push_back(x);
  }
  for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());
  return g;
}

MentionGraph MentionGraph::build(std::span<const UserRecord> records, std::span<const Edge> extra_edges) {
  std::vector<std::string> nodes;
  std::vector<Edge> edges(extra_edges.begin(), extra_edges.end());
  for (const auto& r : records) {
    nodes.push_back(r.user_id);
    for (const auto& m : r.mentioned_ids) {
      if (m.empty()) continue;
      nodes.push_back(m);
      edges.emplace_back(r.user_id, m);
    }
  }
  return from_edges(std::move(nodes), edges);
}

std::optional<NodeId> MentionGraph::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool MentionGraph::has_edge(NodeId a, NodeId b) const {
  const auto& adj = adjacency_.at(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

void MentionGraph::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write graph " + path.string());
  for (const auto& n : names_) out << "node\t" << n << '\n';
  for (const auto& [a, b] : edges_) out << "edge\t" << names_[a] << '\t' << names_[b] << '\n';
}

MentionGraph MentionGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read graph " + path.string());
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos) throw ParseError("expected a tab-separated record", lineno);
    const std::string kind = line.substr(0, t1);
    if (kind == "node") {
      nodes.push_back(line.substr(t1 + 1));
    } else if (kind == "edge") {
      const auto t2 = line.find('\t', t1 + 1);
      if (t2 == std::string::npos) throw ParseError("edge needs two endpoints", lineno);
      edges.emplace_back(line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1));
    } else {
      throw ParseError("unknown record kind '" + kind + "'", lineno);
    }
  }
  return from_edges(std::move(nodes), edges);
}

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read edge list " + path.string());
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() || line.find('\t', tab + 1) != std::string::npos)
      throw ParseError("expected id_a<TAB>id_b", lineno);
    edges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return edges;
}

// Walks

void WalkConfig::validate() const {
  if (walks_per_node < 1) throw ValidationError("walks_per_node must be >= 1");
  if (walk_length < 2) throw ValidationError("walk_length must be >= 2");
  if (!(p > 0.0)) throw ValidationError("p must be > 0");
  if (!(q > 0.0)) throw ValidationError("q must be > 0");
}

namespace {

Walk walk_from(const MentionGraph& g, NodeId start, const WalkConfig& cfg, Rng& rng, std::vector<double>& weights) {
  Walk walk{start};
  walk.reserve(cfg.walk_length);
  while (walk.size() < cfg.walk_length) {
    const NodeId cur = walk.back();
    auto nbrs = g.neighbors(cur);
    if (nbrs.empty()) break;
    if (walk.size() == 1) {
      walk.push_back(nbrs[rng.below(nbrs.size())]);
      continue;
    }
    const NodeId prev = walk[walk.size() - 2];
    weights.resize(nbrs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const NodeId x = nbrs[i];
      const double w = x == prev ? 1.0 / cfg.p : (g.has_edge(x, prev) ? 1.0 : 1.0 / cfg.q);
      weights[i] = w;
      total += w;
    }
    double u = rng.uniform() * total;
    std::size_t pick = nbrs.size() - 1;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (u < weights[i]) {
        pick = i;
        break;
      }
      u -= weights[i];
    }
    walk.push_back(nbrs[pick]);
  }
  return walk;
}

}  // namespace

std::vector<Walk> generate_walks(const MentionGraph& graph, const WalkConfig& config) {
  config.validate();
  const std::size_t n = graph.num_nodes();
  if (n == 0) throw ValidationError("generate_walks: empty graph");
  std::vector<Walk> walks(n * config.walks_per_node);
  std::vector<double> scratch;
  for (NodeId u = 0; u < n; ++u) {
    Rng rng(config.seed, u);
    for (std::size_t r = 0; r < config.walks_per_node; ++r) walks[r * n + u] = walk_from(graph, u, config, rng, scratch);
  }
  return walks;
}

// Node embeddings

NodeEmbeddingTable make_node_table(std::vector<std::string> names, Tensor vectors, Tensor context) {
  if (names.size() != vectors.rows())
    throw ShapeError("node table: " + std::to_string(names.size()) + " names for " + vectors.shape_string());
  NodeEmbeddingTable t;
  t.names = std::move(names);
  t.vectors = std::move(vectors);
  t.context = std::move(context);
  for (std::size_t i = 0; i < t.names.size(); ++i) t.index_.emplace(t.names[i], i);
  return t;
}

std::optional<std::size_t> NodeEmbeddingTable::row(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Tensor NodeEmbeddingTable::vector_or_zero(std::string_view name) const {
  Tensor out(1, dim());
  if (auto r = row(name)) std::copy(vectors.row_span(*r).begin(), vectors.row_span(*r).end(), out.data().begin());
  return out;
}

namespace {

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

NodeEmbeddingTable train_node_embeddings(std::span<const Walk> walks, const std::vector<std::string>& names,
                                         const SkipGramConfig& config, const EpochHook& hook) {
  if (config.dim < 1) throw ValidationError("node embedding dimension must be >= 1");
  if (config.window < 1) throw ValidationError("window must be >= 1");
  const std::size_t n = names.size();
  const std::size_t dim = config.dim;

  std::vector<double> freq(n, 0.0);
  std::uint64_t centers = 0;
  std::uint64_t pairs = 0;
  for (const auto& w : walks) {
    for (NodeId v : w) {
      if (v >= n) throw std::out_of_range("walk node id " + std::to_string(v) + " outside table");
      freq[v] += 1.0;
    }
    if (w.size() >= 2) centers += w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::size_t lo = i >= config.window ? i - config.window : 0;
      const std::size_t hi = std::min(w.size() - 1, i + config.window);
      pairs += hi - lo;
    }
  }
  if (pairs == 0) throw ValidationError("no training pairs: every walk has length 1");

  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) cumulative[i] = (total += std::pow(freq[i], 0.75));

  Rng rng(config.seed);
  Tensor in(n, dim);
  for (double& v : in.data()) v = (rng.uniform() - 0.5) / static_cast<double>(dim);
  Tensor out(n, dim);

  auto draw_negative = [&] {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<NodeId>(std::min<std::size_t>(it - cumulative.begin(), n - 1));
  };

  NodeEmbeddingTable table = make_node_table(names, in, out);
  std::vector<double> grad(dim);
  const double total_steps = static_cast<double>(centers) * static_cast<double>(std::max<std::size_t>(config.epochs, 1));
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss = 0.0;
    for (const auto& w : walks) {
      if (w.size() < 2) continue;
      for (std::size_t i = 0; i < w.size(); ++i, ++step) {
        const double lr = config.learning_rate * std::max(1e-4, 1.0 - static_cast<double>(step) / total_steps);
        const NodeId center = w[i];
        double* cv = &in(center, 0);
        const std::size_t lo = i >= config.window ? i - config.window : 0;
        const std::size_t hi = std::min(w.size() - 1, i + config.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const NodeId ctx = w[j];
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t k = 0; k <= config.negatives; ++k) {
            NodeId target = ctx;
            double label = 1.0;
            if (k > 0) {
              target = draw_negative();
              if (target == ctx) continue;
              label = 0.0;
            }
            double* ov = &out(target, 0);
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += cv[d] * ov[d];
            loss -= label > 0 ? log_sigmoid(dot) : log_sigmoid(-dot);
            const double g = (label - sigmoid(dot)) * lr;
            for (std::size_t d = 0; d < dim; ++d) {
              grad[d] += g * ov[d];
              ov[d] += g * cv[d];
            }
          }
          for (std::size_t d = 0; d < dim; ++d) cv[d] += grad[d];
        }
      }
    }
    table.epoch_loss.push_back(loss / static_cast<double>(pairs));
    table.vectors = in;
    table.context = out;
    if (hook) hook(epoch, table);
  }
  table.vectors = std::move(in);
  table.context = std::move(out);
  return table;
}

// Projection

NetProjection NetProjection::init(std::size_t node_dim, std::size_t out_dim, Rng& rng, const std::string& name) {
  const double limit = std::sqrt(6.0 / static_cast<double>(node_dim + out_dim));
  Tensor w(node_dim, out_dim);
  for (double& v : w.data()) v = rng.uniform(-limit, limit);
  return NetProjection{Parameter{name + ".w", std::move(w), true}, Parameter{name + ".b", Tensor(1, out_dim), true}};
}

Var net_view(Tape& tape, const Tensor& embedding, const NetProjection& proj) {
  if (embedding.rows() != 1 || embedding.cols() != proj.w.value.rows())
    throw ShapeError("net_view: embedding " + embedding.shape_string() + " does not fit projection " +
                     proj.w.value.shape_string());
  Var e = tape.constant(embedding);
  return relu(add(matmul(e, tape.parameter(proj.w)), tape.parameter(proj.b)));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace yun
