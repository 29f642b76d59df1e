#include "yun/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "yun/text.hpp"

namespace yun {

using nlohmann::json;

json evaluation_json(const Evaluation& e) {
  json cm = json::array();
  for (const auto& row : e.confusion.counts) cm.push_back(row);
  return json{{"loss", e.loss}, {"accuracy", e.accuracy}, {"macro_f1", e.macro_f1}, {"confusion", cm}};
}

json report_json(const MetricsReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"train", evaluation_json(e.train)}, {"validation", evaluation_json(e.validation)}});
  json j{{"variant", r.variant},
         {"task", std::string(task_name(r.task))},
         {"best_epoch", r.best_epoch},
         {"stopped_early", r.stopped_early},
         {"epochs", epochs}};
  j["test"] = r.test ? evaluation_json(*r.test) : json(nullptr);
  return j;
}

std::string curves_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "epoch,split,loss,accuracy,macro_f1\n";
  auto row = [&](std::size_t epoch, const char* split, const Evaluation& e) {
    out << epoch << ',' << split << ',' << format_double(e.loss) << ',' << format_double(e.accuracy) << ','
        << format_double(e.macro_f1) << '\n';
  };
  for (const auto& e : r.epochs) {
    row(e.epoch, "train", e.train);
    row(e.epoch, "validation", e.validation);
  }
  if (r.test) row(r.best_epoch, "test", *r.test);
  return out.str();
}

json grid_json(const GridResult& g) {
  json cells = json::array();
  for (const auto& c : g.cells)
    cells.push_back({{"learning_rate", c.learning_rate},
                     {"weight_decay", c.weight_decay},
                     {"validation_macro_f1", c.validation_macro_f1},
                     {"report", report_json(c.report)}});
  return json{{"best", {{"learning_rate", g.best.optimizer.learning_rate}, {"weight_decay", g.best.optimizer.weight_decay}}},
              {"cells", cells}};
}

json ablation_json(const AblationTable& t) {
  json rows = json::array();
  for (const auto& c : t.cells)
    rows.push_back({{"model", c.variant.label()},
                    {"variant", c.variant.name()},
                    {"task", std::string(task_name(c.task))},
                    {"accuracy", c.accuracy},
                    {"macro_f1", c.macro_f1},
                    {"best_epoch", c.report.best_epoch}});
  return json{{"rows", rows}};
}

std::string ablation_text(const AblationTable& t) {
  std::vector<ModelVariant> variants;
  std::vector<Task> tasks;
  for (const auto& c : t.cells) {
    if (std::find(variants.begin(), variants.end(), c.variant) == variants.end()) variants.push_back(c.variant);
    if (std::find(tasks.begin(), tasks.end(), c.task) == tasks.end()) tasks.push_back(c.task);
  }
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-18s", "");
  out << buf;
  for (Task task : tasks) {
    std::snprintf(buf, sizeof buf, " | %-18s", std::string(task_name(task)).c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "\n%-18s", "Model");
  out << buf;
  for (std::size_t i = 0; i < tasks.size(); ++i) out << " | Accuracy  Macro F1";
  out << '\n' << std::string(18 + tasks.size() * 21, '-') << '\n';
  for (const auto& v : variants) {
    std::snprintf(buf, sizeof buf, "%-18s", v.label().c_str());
    out << buf;
    for (Task task : tasks) {
      const auto& c = t.at(v, task);
      std::snprintf(buf, sizeof buf, " | %-8.3f  %-8.3f", c.accuracy, c.macro_f1);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string ablation_csv(const AblationTable& t) {
  std::ostringstream out;
  out << "model,task,accuracy,macro_f1\n";
  for (const auto& c : t.cells)
    out << c.variant.name() << ',' << task_name(c.task) << ',' << format_double(c.accuracy) << ','
        << format_double(c.macro_f1) << '\n';
  return out.str();
}

}  // namespace yun
