// yun: command-line front end for the multiview user classifier.
//
//   yun synth --out data.jsonl --users 200
//   yun preprocess --config run.json
//   yun build-graph | embed-graph | train | evaluate | gridsearch | ablate
//   yun predict --input new_users.jsonl --out predictions.jsonl
//
// Exit status: 0 on success, 1 on invalid input or configuration, 2 on any
// other failure. Logs go to stderr; results go to files.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "yun/config.hpp"
#include "yun/errors.hpp"
#include "yun/pipeline.hpp"
#include "yun/synth.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> work_dir;
  std::optional<std::string> data;
  std::optional<std::string> task;
  std::optional<std::string> variant;
  std::optional<std::string> optimizer;
  std::optional<double> lr;
  std::optional<double> weight_decay;
  std::optional<std::size_t> epochs;
  bool force = false;
  std::size_t jobs = 1;
};

yun::RunConfig resolve(const Overrides& o) {
  yun::RunConfig c = o.config.empty() ? yun::RunConfig{} : yun::RunConfig::load(o.config);
  if (o.seed) c.apply_seed(*o.seed);
  if (o.work_dir) c.work_dir = *o.work_dir;
  if (o.data) c.data = *o.data;
  if (o.task) c.train.task = yun::parse_task(*o.task);
  if (o.variant) {
    c.train.variant = yun::ModelVariant::parse(*o.variant);
    // A variant switch on the command line brings its own default optimizer
    // unless one is given explicitly.
    if (!o.optimizer) c.train.optimizer = yun::default_train_config(c.train.variant, c.train.task).optimizer;
  }
  if (o.optimizer) c.train.optimizer.kind = yun::parse_optimizer(*o.optimizer);
  if (o.lr) c.train.optimizer.learning_rate = *o.lr;
  if (o.weight_decay) c.train.optimizer.weight_decay = *o.weight_decay;
  if (o.epochs) c.train.max_epochs = *o.epochs;
  c.validate();
  c.train.validate();
  return c;
}

void common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "run configuration (JSON)");
  cmd->add_option("--seed", o.seed, "seed for every random stream");
  cmd->add_option("--work-dir", o.work_dir, "artifact directory");
  cmd->add_option("--data", o.data, "dataset file (JSON lines)");
}

void model_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--task", o.task, "user_type or user_motivation");
  cmd->add_option("--variant", o.variant, "view subset, e.g. yun, des_loc, description+network");
  cmd->add_option("--optimizer", o.optimizer, "adadelta or sgd_momentum");
  cmd->add_option("--lr", o.lr, "learning rate");
  cmd->add_option("--weight-decay", o.weight_decay, "L2 weight decay");
  cmd->add_option("--epochs", o.epochs, "maximum epochs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiview user classification"};
  app.require_subcommand(1);
  Overrides o;

  auto* synth = app.add_subcommand("synth", "generate planted-signal synthetic users");
  yun::SyntheticSpec spec;
  std::string synth_out;
  std::vector<double> signal;
  synth->add_option("--out", synth_out, "output file (defaults to the configured data path)");
  synth->add_option("--users", spec.num_users, "number of users");
  synth->add_option("--signal", signal, "signal strength of description, location, tweets, network")
      ->expected(4);
  synth->add_option("--missing-rate", spec.missing_rate, "null description/location rate among noise users");
  common_options(synth, o);

  auto* preprocess = app.add_subcommand("preprocess", "tokenize records and build the vocabulary");
  auto* build_graph = app.add_subcommand("build-graph", "build the mention graph");
  auto* embed_graph = app.add_subcommand("embed-graph", "train Node2Vec node embeddings");
  auto* train = app.add_subcommand("train", "train one model variant");
  auto* evaluate = app.add_subcommand("evaluate", "score a trained checkpoint on the test split");
  auto* gridsearch = app.add_subcommand("gridsearch", "search learning rate and weight decay");
  auto* ablate = app.add_subcommand("ablate", "train and test the eight view configurations");
  auto* predict = app.add_subcommand("predict", "label new records with a trained checkpoint");
  for (auto* cmd : {preprocess, build_graph, embed_graph, train, evaluate, gridsearch, ablate, predict}) {
    common_options(cmd, o);
    cmd->add_flag("--force", o.force, "rerun even when inputs are unchanged");
  }
  for (auto* cmd : {train, evaluate, gridsearch, ablate, predict}) model_options(cmd, o);
  for (auto* cmd : {gridsearch, ablate}) cmd->add_option("--jobs", o.jobs, "cells trained concurrently");

  std::string predict_in, predict_out = "predictions.jsonl";
  predict->add_option("--input", predict_in, "records to label")->required();
  predict->add_option("--out", predict_out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const yun::RunConfig c = resolve(o);
    const yun::StageOptions opts{o.force};
    if (synth->parsed()) {
      if (!signal.empty()) std::copy(signal.begin(), signal.end(), spec.signal.begin());
      spec.seed = c.seed;
      yun::run_synth(spec, synth_out.empty() ? c.data : synth_out);
    } else if (preprocess->parsed()) {
      yun::run_preprocess(c, opts);
    } else if (build_graph->parsed()) {
      yun::run_build_graph(c, opts);
    } else if (embed_graph->parsed()) {
      yun::run_embed_graph(c, opts);
    } else if (train->parsed()) {
      yun::run_train(c, opts);
    } else if (evaluate->parsed()) {
      yun::run_evaluate(c, opts);
    } else if (gridsearch->parsed()) {
      yun::run_gridsearch(c, opts, o.jobs);
    } else if (ablate->parsed()) {
      yun::run_ablate(c, opts, o.jobs);
    } else if (predict->parsed()) {
      yun::run_predict(c, predict_in, predict_out);
    }
    return 0;
  } catch (const yun::ValidationError& e) {
    std::cerr << "yun: error: " << e.what() << '\n';
    return 1;
  } catch (const yun::ParseError& e) {
    std::cerr << "yun: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "yun: failed: " << e.what() << '\n';
    return 2;
  }
}
