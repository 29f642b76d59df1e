#include "yun/model.hpp"

#include <cmath>

#include "yun/errors.hpp"

namespace yun {

void ModelConfig::validate() const {
  if (word_dim < 1 || lstm_size < 1 || attention_size < 1 || node_dim < 1 || net_size < 1)
    throw ValidationError("model dimensions must be positive");
  for (std::size_t h : hidden_sizes)
    if (h < 1) throw ValidationError("classifier hidden sizes must be positive");
  if (!(init_scale > 0.0)) throw ValidationError("init_scale must be > 0");
  if (!(embedding_init > 0.0)) throw ValidationError("embedding_init must be > 0");
}

// Variants

namespace {

struct NamedVariant {
  std::string_view name;
  std::string_view label;
  ModelVariant variant;
};

constexpr NamedVariant kNamed[] = {
    {"description", "Description", {true, false, false, false}},
    {"location", "Location", {false, true, false, false}},
    {"tweets", "Tweets", {false, false, true, false}},
    {"network", "Network", {false, false, false, true}},
    {"des_loc", "Des + Loc", {true, true, false, false}},
    {"des_loc_twt", "Des + Loc + Twt", {true, true, true, false}},
    {"des_loc_net", "Des + Loc + Net", {true, true, false, true}},
    {"yun", "YUN", {true, true, true, true}},
};

}  // namespace

std::string ModelVariant::name() const {
  for (const auto& n : kNamed)
    if (n.variant == *this) return std::string(n.name);
  std::string out;
  auto part = [&](bool on, const char* s) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += s;
  };
  part(description, "des");
  part(location, "loc");
  part(tweets, "twt");
  part(network, "net");
  return out;
}

std::string ModelVariant::label() const {
  for (const auto& n : kNamed)
    if (n.variant == *this) return std::string(n.label);
  std::string out;
  auto part = [&](bool on, const char* s) {
    if (!on) return;
    if (!out.empty()) out += " + ";
    out += s;
  };
  part(description, "Des");
  part(location, "Loc");
  part(tweets, "Twt");
  part(network, "Net");
  return out;
}

ModelVariant ModelVariant::parse(std::string_view name) {
  for (const auto& n : kNamed)
    if (n.name == name) return n.variant;
  ModelVariant v{false, false, false, false};
  std::size_t start = 0;
  while (start <= name.size()) {
    const auto end = std::min(name.find('+', start), name.size());
    const auto part = name.substr(start, end - start);
    if (part == "des" || part == "description") v.description = true;
    else if (part == "loc" || part == "location") v.location = true;
    else if (part == "twt" || part == "tweets") v.tweets = true;
    else if (part == "net" || part == "network") v.network = true;
    else throw ValidationError("unknown model variant '" + std::string(name) + "'");
    start = end + 1;
  }
  v.validate();
  return v;
}

const std::array<ModelVariant, 8>& ModelVariant::ablation_rows() {
  static const std::array<ModelVariant, 8> rows = [] {
    std::array<ModelVariant, 8> r;
    for (std::size_t i = 0; i < 8; ++i) r[i] = kNamed[i].variant;
    return r;
  }();
  return rows;
}

void ModelVariant::validate() const {
  if (!(description || location || tweets || network)) throw ValidationError("a model variant needs at least one view");
}

// Parameters

std::vector<Parameter*> SequenceView::parameters() {
  std::vector<Parameter*> out = forward.parameters();
  for (Parameter* p : backward.parameters()) out.push_back(p);
  for (Parameter* p : attention.parameters()) out.push_back(p);
  return out;
}

namespace {

DenseLayer dense(std::size_t in, std::size_t out, Rng& rng, const std::string& name) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Tensor w(in, out);
  for (double& v : w.data()) v = rng.uniform(-limit, limit);
  return DenseLayer{Parameter{name + ".w", std::move(w), true}, Parameter{name + ".b", Tensor(1, out), true}};
}

SequenceView sequence_view(const ModelConfig& c, Rng& rng, const std::string& name) {
  SequenceView v{LstmParams::init(c.word_dim, c.lstm_size, rng, name + ".fwd", c.init_scale),
                 LstmParams::init(c.word_dim, c.lstm_size, rng, name + ".bwd", c.init_scale),
                 AttentionParams::init(2 * c.lstm_size, c.attention_size, rng, name + ".attn", c.init_scale)};
  return v;
}

}  // namespace

std::size_t fused_width(const ModelConfig& config, const ModelVariant& variant) {
  std::size_t w = 0;
  if (variant.description) w += 2 * config.lstm_size;
  if (variant.location) w += config.lstm_size;
  if (variant.tweets) w += 2 * config.lstm_size;
  if (variant.network) w += config.net_size;
  return w;
}

YunParams YunParams::init(const ModelConfig& config, const ModelVariant& variant, std::size_t vocab_size,
                          std::uint64_t seed, std::optional<EmbeddingTable> pretrained) {
  config.validate();
  variant.validate();
  YunParams p;
  p.config = config;
  p.variant = variant;
  if (pretrained) {
    if (pretrained->dim() != config.word_dim)
      throw ShapeError("pretrained embedding dimension " + std::to_string(pretrained->dim()) + " != word_dim " +
                       std::to_string(config.word_dim));
    p.embedding = std::move(*pretrained);
  } else {
    p.embedding = EmbeddingTable::random(vocab_size, config.word_dim, config.embedding_init, Rng::mix(seed) ^ 0x11);
  }
  // Separate streams keep each component's init independent of which
  // other views are enabled.
  if (variant.description) {
    Rng rng(seed, 1);
    p.description = sequence_view(config, rng, "description");
  }
  if (variant.location) {
    Rng rng(seed, 2);
    p.location = LstmParams::init(config.word_dim, config.lstm_size, rng, "location", config.init_scale);
  }
  if (variant.tweets) {
    Rng rng(seed, 3);
    p.tweets = sequence_view(config, rng, "tweets");
  }
  if (variant.network) {
    Rng rng(seed, 4);
    p.network = NetProjection::init(config.node_dim, config.net_size, rng, "network");
  }
  Rng rng(seed, 5);
  std::size_t in = fused_width(config, variant);
  for (std::size_t i = 0; i < config.hidden_sizes.size(); ++i) {
    p.hidden.push_back(dense(in, config.hidden_sizes[i], rng, "classifier.hidden" + std::to_string(i)));
    in = config.hidden_sizes[i];
  }
  p.output = dense(in, kNumClasses, rng, "classifier.output");
  return p;
}

std::size_t YunParams::input_width() const { return fused_width(config, variant); }

std::vector<Parameter*> YunParams::parameters() {
  std::vector<Parameter*> out{&embedding.table};
  auto take = [&](std::vector<Parameter*> ps) { out.insert(out.end(), ps.begin(), ps.end()); };
  if (description) take(description->parameters());
  if (location) take(location->parameters());
  if (tweets) take(tweets->parameters());
  if (network) take(network->parameters());
  for (auto& l : hidden) take({&l.w, &l.b});
  take({&output.w, &output.b});
  return out;
}

std::vector<const Parameter*> YunParams::parameters() const {
  auto ps = const_cast<YunParams*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

std::vector<Parameter*> YunParams::trainable() {
  std::vector<Parameter*> out;
  for (Parameter* p : parameters())
    if (p->trainable) out.push_back(p);
  return out;
}

// Forward pass

namespace {

Var sequence_representation(Tape& tape, std::span<const std::size_t> ids, const EmbeddingTable& table,
                            const SequenceView& view) {
  if (ids.empty()) return tape.constant(Tensor(1, 2 * view.forward.hidden()));
  Var states = bilstm_encode(tape, ids, table, view.forward, view.backward);
  return attention_pool(tape, states, view.attention).pooled;
}

}  // namespace

Var encode_user(Tape& tape, const EncodedUser& user, const YunParams& params) {
  std::vector<Var> parts;
  parts.reserve(4);
  if (params.description) parts.push_back(sequence_representation(tape, user.description, params.embedding, *params.description));
  if (params.location) parts.push_back(lstm_encode(tape, user.location, params.embedding, *params.location));
  if (params.tweets) parts.push_back(sequence_representation(tape, user.tweets, params.embedding, *params.tweets));
  if (params.network) {
    const Tensor node = user.node.empty() ? Tensor(1, params.config.node_dim) : user.node;
    parts.push_back(net_view(tape, node, *params.network));
  }
  return parts.size() == 1 ? parts.front() : concat(parts);
}

Var classifier_logits(Tape& tape, Var fused, const YunParams& params) {
  if (fused.rows() != 1 || fused.cols() != params.input_width())
    throw ShapeError("classify: representation " + fused.value().shape_string() + " does not match input width " +
                     std::to_string(params.input_width()));
  Var x = fused;
  for (const auto& layer : params.hidden)
    x = relu(add(matmul(x, tape.parameter(layer.w)), tape.parameter(layer.b)));
  return add(matmul(x, tape.parameter(params.output.w)), tape.parameter(params.output.b));
}

Var classify(Tape& tape, Var fused, const YunParams& params) {
  return softmax(classifier_logits(tape, fused, params));
}

Var user_loss(Tape& tape, const EncodedUser& user, const YunParams& params, std::size_t target, double weight) {
  return softmax_cross_entropy(classifier_logits(tape, encode_user(tape, user, params), params), target, weight);
}

Tensor predict_proba(const EncodedUser& user, const YunParams& params) {
  Tape tape;
  return classify(tape, encode_user(tape, user, params), params).value();
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::size_t predict(const EncodedUser& user, const YunParams& params) {
  return argmax(predict_proba(user, params).data());
}

}  // namespace yun
