#pragma once

// Serialized views of training, grid-search and ablation results.

#include <string>

#include <json.hpp>

#include "yun/train.hpp"

namespace yun {

nlohmann::json evaluation_json(const Evaluation& e);
nlohmann::json report_json(const MetricsReport& r);

/// epoch,split,loss,accuracy,macro_f1: one row per epoch and split, plus
/// a final test row at the best epoch when the report has test metrics.
std::string curves_csv(const MetricsReport& r);

nlohmann::json grid_json(const GridResult& g);

nlohmann::json ablation_json(const AblationTable& t);
/// Model | user type Accuracy, Macro F1 | user motivation Accuracy, Macro F1
std::string ablation_text(const AblationTable& t);
/// model,task,accuracy,macro_f1
std::string ablation_csv(const AblationTable& t);

}  // namespace yun
