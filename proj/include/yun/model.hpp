#pragma once

// The fused multiview user model: description and tweets Bi-LSTM+attention,
// location LSTM, network projection, concatenation, and a feed-forward
// classifier over three classes.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "yun/autodiff.hpp"
#include "yun/encoders.hpp"
#include "yun/graph.hpp"
#include "yun/records.hpp"
#include "yun/text.hpp"

namespace yun {

struct ModelConfig {
  std::size_t word_dim = 300;
  std::size_t lstm_size = 150;
  std::size_t attention_size = 300;
  std::size_t node_dim = 300;
  std::size_t net_size = 150;
  /// Hidden widths of the classifier before the 3-way output layer.
  std::vector<std::size_t> hidden_sizes = {200};
  double init_scale = 0.08;
  /// Range of the uniform init for randomly initialized token embeddings.
  double embedding_init = 0.5;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Which views feed the classifier.
struct ModelVariant {
  bool description = true;
  bool location = true;
  bool tweets = true;
  bool network = true;

  /// Canonical names: description, location, tweets, network, des_loc,
  /// des_loc_twt, des_loc_net, yun. Other subsets are named by their
  /// enabled views joined with '+'.
  std::string name() const;
  /// Row label used in result tables ("Des + Loc", "YUN", ...).
  std::string label() const;
  static ModelVariant parse(std::string_view name);
  /// The eight configurations of the ablation table, in row order.
  static const std::array<ModelVariant, 8>& ablation_rows();
  void validate() const;
  friend bool operator==(const ModelVariant&, const ModelVariant&) = default;
};

/// One user's model inputs after preprocessing and id encoding.
struct EncodedUser {
  std::string user_id;
  std::vector<std::size_t> description;
  std::vector<std::size_t> location;
  std::vector<std::size_t> tweets;
  Tensor node;  // 1 x node_dim, zeros when the user is not in the graph
  std::optional<std::size_t> type_label;
  std::optional<std::size_t> motivation_label;

  std::optional<std::size_t> label(Task task) const {
    return task == Task::UserType ? type_label : motivation_label;
  }
};

struct SequenceView {
  LstmParams forward;
  LstmParams backward;
  AttentionParams attention;
  std::vector<Parameter*> parameters();
};

struct DenseLayer {
  Parameter w;  // in x out
  Parameter b;  // 1 x out
};

struct YunParams {
  ModelConfig config;
  ModelVariant variant;
  EmbeddingTable embedding;
  std::optional<SequenceView> description;
  std::optional<LstmParams> location;
  std::optional<SequenceView> tweets;
  std::optional<NetProjection> network;
  std::vector<DenseLayer> hidden;
  DenseLayer output;

  /// Builds parameters for the enabled views only. Without a pretrained
  /// table a trainable random table of vocab_size rows is created.
  static YunParams init(const ModelConfig& config, const ModelVariant& variant, std::size_t vocab_size,
                        std::uint64_t seed, std::optional<EmbeddingTable> pretrained = std::nullopt);

  std::size_t input_width() const;
  std::vector<Parameter*> parameters();
  std::vector<Parameter*> trainable();
  std::vector<const Parameter*> parameters() const;
};

/// Width of R_user for a variant: 2D, D, 2D and net_size per enabled view.
std::size_t fused_width(const ModelConfig& config, const ModelVariant& variant);

/// R_user: enabled views concatenated in the order description, location,
/// tweets, network. Empty text views contribute zeros.
Var encode_user(Tape& tape, const EncodedUser& user, const YunParams& params);

/// Pre-softmax class scores (1 x 3).
Var classifier_logits(Tape& tape, Var fused, const YunParams& params);

/// Class probabilities (1 x 3) for a fused representation.
Var classify(Tape& tape, Var fused, const YunParams& params);

/// Cross-entropy loss of one user against `target`.
Var user_loss(Tape& tape, const EncodedUser& user, const YunParams& params, std::size_t target,
              double weight = 1.0);

Tensor predict_proba(const EncodedUser& user, const YunParams& params);

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

std::size_t predict(const EncodedUser& user, const YunParams& params);

}  // namespace yun
