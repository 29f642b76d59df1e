// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers to run a subset:
//   yun_acceptance 3 5

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <sys/wait.h>

#include "support.hpp"
#include "yun/encoders.hpp"
#include "yun/grad_check.hpp"
#include "yun/graph.hpp"
#include "yun/metrics.hpp"
#include "yun/model.hpp"
#include "yun/train.hpp"

using namespace yun;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Adadelta learning-rate factor for the fusion comparison. At 0.01 every
// view is still improving when the 30-epoch budget runs out on 360 training
// users; 0.5 is the largest value in the search grid and converges in time.
constexpr double kFusionAdadeltaLr = 0.5;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// 1. Gradient of the full four-view forward on two toy users.
Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  ModelConfig c;
  c.word_dim = 6;
  c.lstm_size = 4;
  c.attention_size = 4;
  c.node_dim = 6;
  c.net_size = 4;
  c.hidden_sizes = {4};
  YunParams p = YunParams::init(c, ModelVariant{}, 10, 17);
  testing::redraw(p.trainable(), 5);
  auto make = [&](std::vector<std::size_t> des, std::vector<std::size_t> loc, std::vector<std::size_t> twt,
                  double node, std::size_t label) {
    EncodedUser u;
    u.description = std::move(des);
    u.location = std::move(loc);
    u.tweets = std::move(twt);
    u.node = Tensor(1, c.node_dim);
    for (std::size_t i = 0; i < c.node_dim; ++i) u.node[i] = node * std::sin(static_cast<double>(i + 1));
    u.type_label = label;
    return u;
  };
  const EncodedUser a = make({2, 5, 7, 3}, {8, 9}, {4, 6, 2, 9, 5}, 0.8, 0);
  const EncodedUser b = make({6, 2}, {3}, {7, 8, 4}, -0.6, 2);
  const GradCheckResult r = grad_check_detailed(
      [&](Tape& t) {
        const Var parts[] = {user_loss(t, a, p, 0), user_loss(t, b, p, 2)};
        return sum(concat(parts));
      },
      p.trainable(), 1e-5);
  const double secs = seconds_since(t0);
  return {r.max_relative_error < 1e-4 && secs < 30.0,
          fmt("max relative error %.3g over %.0f coordinates, %.1f s", r.max_relative_error,
              static_cast<double>(r.coordinates), secs) +
              ", worst " + r.worst};
}

// 2. Attention weights, score range and the singleton case.
Outcome attention_properties() {
  Rng rng(2024);
  double worst_sum = 0, worst_m = 0, worst_single = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(12), state = 1 + rng.below(10), attn = 1 + rng.below(10);
    const AttentionParams att = AttentionParams::init(state, attn, rng, "a", rng.uniform(0.05, 3.0));
    Tensor h(n, state);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = rng.uniform(-5, 5);
    Tape tape;
    const AttentionResult r = attention_pool(tape, tape.constant(h), att);
    double total = 0;
    for (double a : r.weights.value().values()) total += a;
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    for (double m : r.scores.value().values()) worst_m = std::max(worst_m, std::abs(m));
    if (n == 1) worst_single = std::max(worst_single, std::abs(r.weights.value()[0] - 1.0));
  }
  return {worst_sum <= 1e-9 && worst_m <= 1.0 && worst_single == 0.0,
          fmt("max |sum a - 1| = %.3g, max |m| = %.6f, singleton deviation %.3g", worst_sum, worst_m, worst_single)};
}

// 3. Planted partition: 2 x 20 nodes, intra 0.5, inter 0.02.
Outcome node2vec_sanity() {
  const auto t0 = Clock::now();
  Rng rng(77);
  std::vector<std::string> names;
  for (int i = 0; i < 40; ++i) names.push_back(fmt("v%02.0f", i));
  std::vector<Edge> edges;
  for (int i = 0; i < 40; ++i)
    for (int j = i + 1; j < 40; ++j)
      if (rng.bernoulli((i < 20) == (j < 20) ? 0.5 : 0.02)) edges.push_back({names[i], names[j]});
  const MentionGraph g = MentionGraph::from_edges(names, edges);
  WalkConfig wc;
  wc.seed = 77;
  SkipGramConfig sc;
  sc.seed = 77;
  const NodeEmbeddingTable t = train_node_embeddings(generate_walks(g, wc), g.names(), sc);
  double intra = 0, inter = 0;
  int ni = 0, nx = 0;
  for (std::size_t a = 0; a < 40; ++a)
    for (std::size_t b = a + 1; b < 40; ++b) {
      const double c = cosine(t.vectors.row_span(a), t.vectors.row_span(b));
      if ((a < 20) == (b < 20)) {
        intra += c;
        ++ni;
      } else {
        inter += c;
        ++nx;
      }
    }
  intra /= ni;
  inter /= nx;
  const double secs = seconds_since(t0);
  return {intra - inter >= 0.1 && secs < 60.0,
          fmt("intra %.3f, inter %.3f, gap %.3f, %.1f s", intra, inter, intra - inter, secs)};
}

// 4. Empirical second-order transitions against the exact p,q law.
Outcome walk_law() {
  struct G {
    const char* name;
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
  };
  const std::vector<G> graphs = {
      {"triangle", {"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}}},
      {"path4", {"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}}},
      {"star5", {"h", "a", "b", "c", "d"}, {{"h", "a"}, {"h", "b"}, {"h", "c"}, {"h", "d"}}},
      {"kite", {"a", "b", "c", "d"}, {{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}, {"a", "c"}}},
      {"two-triangles", {"a", "b", "c", "d", "e", "f"},
       {{"a", "b"}, {"b", "c"}, {"c", "a"}, {"d", "e"}, {"e", "f"}, {"f", "d"}, {"c", "d"}}},
  };
  const std::pair<double, double> pqs[] = {{1, 1}, {0.5, 2}, {2, 0.5}};
  double worst = 0;
  std::string where;
  std::size_t min_steps = SIZE_MAX;
  for (const auto& gd : graphs) {
    const MentionGraph g = MentionGraph::from_edges(gd.nodes, gd.edges);
    for (auto [p, q] : pqs) {
      WalkConfig wc;
      wc.p = p;
      wc.q = q;
      wc.walk_length = 1000;
      // At least 100k second-order steps per (previous, current) state. Biased
      // walks visit states unevenly, so resample with more walks until the
      // rarest state is covered.
      const std::size_t states = 2 * g.num_edges();
      wc.walks_per_node = 100000 * states / (g.num_nodes() * (wc.walk_length - 2)) + 1;
      wc.seed = 31;
      // (prev, cur) -> next -> count, from the second step of each walk on.
      std::map<std::pair<NodeId, NodeId>, std::map<NodeId, std::size_t>> counts;
      for (;;) {
        counts.clear();
        for (const auto& w : generate_walks(g, wc))
          for (std::size_t i = 2; i < w.size(); ++i) ++counts[{w[i - 2], w[i - 1]}][w[i]];
        std::size_t rarest = SIZE_MAX;
        for (const auto& [state, nexts] : counts) {
          std::size_t n = 0;
          for (const auto& [x, c] : nexts) n += c;
          rarest = std::min(rarest, n);
        }
        if (counts.size() == states && rarest >= 100000) break;
        wc.walks_per_node = wc.walks_per_node * 110000 / std::max<std::size_t>(rarest == SIZE_MAX ? 1 : rarest, 1) + 1;
      }
      for (const auto& [state, nexts] : counts) {
        const auto [prev, cur] = state;
        double z = 0;
        std::map<NodeId, double> weight;
        for (NodeId x : g.neighbors(cur)) {
          const double wx = x == prev ? 1.0 / p : g.has_edge(prev, x) ? 1.0 : 1.0 / q;
          weight[x] = wx;
          z += wx;
        }
        double total = 0;
        for (const auto& [x, n] : nexts) total += static_cast<double>(n);
        min_steps = std::min(min_steps, static_cast<std::size_t>(total));
        for (const auto& [x, wx] : weight) {
          const auto it = nexts.find(x);
          const double emp = it == nexts.end() ? 0.0 : static_cast<double>(it->second) / total;
          const double dev = std::abs(emp - wx / z);
          if (dev > worst) {
            worst = dev;
            where = std::string(gd.name) + fmt(" p=%.1f q=%.1f", p, q);
          }
        }
        for (const auto& [x, n] : nexts)
          if (!weight.contains(x)) {
            worst = 1.0;
            where = std::string(gd.name) + " left the edge set";
          }
      }
    }
  }
  return {worst <= 0.02 && min_steps >= 100000,
          fmt("max deviation %.4f (", worst) + where + fmt("), >= %.0f steps per state", static_cast<double>(min_steps))};
}

// 5. Fusion beats every single view on complementary planted signals.
Outcome fusion_beats_views() {
  const auto t0 = Clock::now();
  const ModelConfig model = testing::small_model(16);
  const ModelVariant singles[] = {{true, false, false, false},
                                  {false, true, false, false},
                                  {false, false, true, false},
                                  {false, false, false, true}};
  const ModelVariant dlt{true, true, true, false}, full{};
  std::map<std::string, double> acc;
  const std::uint64_t seeds[] = {1, 2, 3};
  for (std::uint64_t seed : seeds) {
    SyntheticSpec s;
    s.num_users = 600;
    s.signal = {0.5, 0.3, 0.5, 0.5};
    s.seed = seed;
    const testing::Prepared prep = testing::prepare(s, model);
    SplitSpec split_spec;
    split_spec.seed = seed;
    const DataSplits data = split(prep.users, split_spec);
    auto run = [&](const ModelVariant& v) {
      TrainConfig c = default_train_config(v, Task::UserType);
      c.seed = seed;
      c.optimizer.learning_rate = c.optimizer.kind == OptimizerKind::Adadelta ? kFusionAdadeltaLr : c.optimizer.learning_rate;
      const TrainResult r = train(model, c, data, prep.vocab.size());
      acc[v.name()] += r.report.test->accuracy / 3.0;
    };
    for (const auto& v : singles) run(v);
    run(dlt);
    run(full);
  }
  const double secs = seconds_since(t0);
  double best_single = 0;
  std::string detail;
  for (const auto& v : singles) {
    best_single = std::max(best_single, acc[v.name()]);
    detail += v.name() + fmt(" %.3f, ", acc[v.name()]);
  }
  detail += fmt("des_loc_twt %.3f, yun %.3f; %.0f s", acc[dlt.name()], acc[full.name()], secs);
  const bool pass = acc[full.name()] >= best_single + 0.05 && acc[dlt.name()] < acc[full.name()] && secs < 900.0;
  return {pass, detail};
}

// 6. Overfit 50 fully informative users at the table settings.
Outcome overfit_capability() {
  const auto t0 = Clock::now();
  ModelConfig model;
  model.lstm_size = 16;
  SyntheticSpec s;
  s.num_users = 50;
  s.signal = {1, 1, 1, 1};
  s.seed = 6;
  const testing::Prepared prep = testing::prepare(s, model);
  const DataSplits data = split(prep.users, SplitSpec{});
  TrainConfig c = default_train_config(ModelVariant{}, Task::UserType);
  c.patience = kNoPatience;
  double best = 0;
  std::size_t first = 0;
  const TrainResult r = train(model, c, data, prep.vocab.size(), std::nullopt, [&](const EpochRecord& e) {
    if (e.train.accuracy > best) {
      best = e.train.accuracy;
      if (best >= 0.95 && first == 0) first = e.epoch + 1;
    }
  });
  (void)r;
  return {best >= 0.95,
          fmt("best training accuracy %.3f (first >= 0.95 at epoch %.0f) with lr %.2g Adadelta, %.0f s", best,
              static_cast<double>(first), c.optimizer.learning_rate, seconds_since(t0))};
}

// 7. Macro-F1 against a brute-force recount.
Outcome metric_oracle() {
  Rng rng(7);
  std::size_t mismatches = 0, cases = 0;
  auto brute = [](const std::vector<std::size_t>& g, const std::vector<std::size_t>& p) {
    double f = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        tp += g[i] == c && p[i] == c;
        fp += g[i] != c && p[i] == c;
        fn += g[i] == c && p[i] != c;
      }
      const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      f += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    }
    return f / kNumClasses;
  };
  auto check = [&](const std::vector<std::size_t>& g, const std::vector<std::size_t>& p) {
    ++cases;
    if (std::abs(score(g, p).macro_f1 - brute(g, p)) > 1e-12) ++mismatches;
  };
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<std::size_t> g(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = rng.below(3);
      p[i] = rng.bernoulli(0.5) ? g[i] : rng.below(3);
    }
    check(g, p);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    const std::vector<std::size_t> one(25, c), other(25, (c + 1) % 3);
    check(one, one);
    check(one, other);
    check(other, one);
  }
  return {mismatches == 0, fmt("%.0f mismatches over %.0f cases", static_cast<double>(mismatches),
                              static_cast<double>(cases))};
}

int cli(const fs::path& dir, const std::string& args) {
  const std::string cmd =
      std::string(YUN_CLI) + " " + args + " -c " + (dir / "run.json").string() + " 2>> " + (dir / "log.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path pipeline_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("yun_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  std::ofstream(d / "run.json") << R"({
    "seed": 11, "data": ")" + (d / "data.jsonl").string() + R"(", "work_dir": ")" + (d / "work").string() + R"(",
    "model": {"word_dim": 16, "lstm_size": 8, "attention_size": 16, "node_dim": 16, "net_size": 8,
              "hidden_sizes": [16]},
    "node2vec": {"dimension": 16, "walks_per_node": 10, "walk_length": 40, "window": 5},
    "train": {"max_epochs": 4, "learning_rate": 0.5}
  })";
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. Two identical end-to-end runs give byte-identical metrics files.
Outcome determinism() {
  std::vector<fs::path> dirs{pipeline_dir("det_a"), pipeline_dir("det_b")};
  for (const auto& d : dirs)
    for (const char* step : {"synth --users 200", "preprocess", "build-graph", "embed-graph", "train", "evaluate"})
      if (cli(d, step) != 0) return {false, std::string("`yun ") + step + "` failed in " + d.string()};
  const fs::path run = fs::path("work") / "runs" / "user_type-yun";
  bool same = true;
  std::string detail;
  for (const char* f : {"curves.csv", "evaluation.csv", "metrics.json"}) {
    const std::string a = slurp(dirs[0] / run / f), b = slurp(dirs[1] / run / f);
    const bool eq = !a.empty() && a == b;
    same = same && eq;
    detail += (detail.empty() ? "" : ", ") + std::string(f) + (eq ? " identical" : " differs");
  }
  return {same, detail};
}

// 9. The ablation artifact in machine- and human-readable form.
Outcome ablation_artifact() {
  const fs::path d = pipeline_dir("ablate");
  for (const char* step : {"synth --users 150", "preprocess", "build-graph", "embed-graph", "ablate"})
    if (cli(d, step) != 0) return {false, std::string("`yun ") + step + "` failed"};
  const fs::path work = d / "work";
  const std::vector<std::string> names = {"description", "location", "tweets", "network",
                                          "des_loc", "des_loc_twt", "des_loc_net", "yun"};
  const std::vector<std::string> labels = {"Description", "Location", "Tweets", "Network",
                                           "Des + Loc", "Des + Loc + Twt", "Des + Loc + Net", "YUN"};
  // CSV: header plus one row per (model, task), models in table order.
  std::istringstream csv(slurp(work / "ablation.csv"));
  std::string line;
  std::getline(csv, line);
  if (line != "model,task,accuracy,macro_f1") return {false, "unexpected CSV header: " + line};
  std::vector<std::pair<std::string, std::string>> rows;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    rows.emplace_back(line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1));
  }
  if (rows.size() != 16) return {false, fmt("CSV has %.0f rows", static_cast<double>(rows.size()))};
  for (std::size_t i = 0; i < 8; ++i) {
    if (rows[2 * i].first != names[i] || rows[2 * i + 1].first != names[i]) return {false, "CSV row order"};
    if (rows[2 * i].second != "user_type" || rows[2 * i + 1].second != "user_motivation")
      return {false, "CSV task order"};
  }
  // JSON
  std::ifstream jf(work / "ablation.json");
  const auto j = nlohmann::json::parse(jf);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : j.at("rows")) {
    if (!r.contains("accuracy") || !r.contains("macro_f1")) return {false, "JSON row without metrics"};
    seen.insert({r.at("variant").get<std::string>(), r.at("task").get<std::string>()});
  }
  if (seen.size() != 16) return {false, "JSON does not cover 8 models x 2 tasks"};
  // Text table: one line per model in order, both tasks in the header.
  const std::string text = slurp(work / "ablation.txt");
  if (text.find("user_type") == std::string::npos || text.find("user_motivation") == std::string::npos ||
      text.find("Accuracy") == std::string::npos || text.find("Macro F1") == std::string::npos)
    return {false, "text table header incomplete"};
  std::size_t pos = 0;
  for (const auto& l : labels) {
    const auto at = text.find("\n" + l + " ", pos);
    if (at == std::string::npos) return {false, "text table lacks row " + l};
    pos = at + 1;
  }
  return {true, "8 models x 2 tasks x {accuracy, macro_f1} in ablation.csv, ablation.json and ablation.txt"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"attention properties", attention_properties},
      {"node2vec sanity", node2vec_sanity},
      {"walk law", walk_law},
      {"fusion beats views", fusion_beats_views},
      {"overfit capability", overfit_capability},
      {"metric oracle", metric_oracle},
      {"determinism", determinism},
      {"ablation artifact", ablation_artifact},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
