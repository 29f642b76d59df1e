#include "yun/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "yun/errors.hpp"

namespace yun {

using nlohmann::json;

namespace {

const std::set<std::string> kKeys = {"user_id",       "description", "location",        "tweets",
                                     "mentioned_ids", "type_label",  "motivation_label"};

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) throw ValidationError(std::string("'") + key + "' must be a string or null");
  return j[key].get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  if (!j[key].is_array()) throw ValidationError(std::string("'") + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw ValidationError(std::string("'") + key + "' must be a list of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

template <typename Enum>
std::optional<Enum> label(const json& j, const char* key, Task task) {
  auto s = optional_string(j, key);
  if (!s) return std::nullopt;
  auto cls = parse_class(task, *s);
  if (!cls) throw ValidationError(std::string("'") + key + "' has unknown value '" + *s + "'");
  return static_cast<Enum>(*cls);
}

std::string percent(std::size_t n, std::size_t total) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", total ? 100.0 * static_cast<double>(n) / static_cast<double>(total) : 0.0);
  return buf;
}

}  // namespace

UserRecord parse_record(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("record must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!kKeys.contains(k)) throw ValidationError("unknown key '" + k + "'");
  if (!j.contains("user_id") || !j["user_id"].is_string() || j["user_id"].get<std::string>().empty())
    throw ValidationError("'user_id' must be a non-empty string");

  UserRecord r;
  r.user_id = j["user_id"].get<std::string>();
  r.description = optional_string(j, "description");
  r.location = optional_string(j, "location");
  r.tweets = string_list(j, "tweets");
  r.mentioned_ids = string_list(j, "mentioned_ids");
  r.type_label = label<UserType>(j, "type_label", Task::UserType);
  r.motivation_label = label<Motivation>(j, "motivation_label", Task::UserMotivation);
  return r;
}

std::string serialize_record(const UserRecord& r) {
  json j;
  j["user_id"] = r.user_id;
  j["description"] = r.description ? json(*r.description) : json(nullptr);
  j["location"] = r.location ? json(*r.location) : json(nullptr);
  j["tweets"] = r.tweets;
  j["mentioned_ids"] = r.mentioned_ids;
  j["type_label"] = r.type_label ? json(class_name(Task::UserType, static_cast<std::size_t>(*r.type_label))) : json(nullptr);
  j["motivation_label"] =
      r.motivation_label ? json(class_name(Task::UserMotivation, static_cast<std::size_t>(*r.motivation_label)))
                         : json(nullptr);
  return j.dump();
}

IngestResult ingest(const std::filesystem::path& path, bool lenient) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read dataset " + path.string());
  IngestResult out;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      UserRecord r = parse_record(line);
      auto [it, inserted] = first_line.emplace(r.user_id, lineno);
      if (!inserted)
        throw ValidationError("duplicate user_id '" + r.user_id + "' (first seen on line " + std::to_string(it->second) +
                              ")");
      out.records.push_back(std::move(r));
    } catch (const ValidationError& e) {
      out.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!out.errors.empty() && !lenient) {
    std::string msg = std::to_string(out.errors.size()) + " invalid record(s) in " + path.string();
    for (const auto& e : out.errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  out.summary = summarize(out.records);
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<UserRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

LabelSummary summarize(const std::vector<UserRecord>& records) {
  LabelSummary s;
  s.total = records.size();
  for (const auto& r : records) {
    if (auto l = r.label(Task::UserType)) ++s.type[*l]; else ++s.type_unlabeled;
    if (auto l = r.label(Task::UserMotivation)) ++s.motivation[*l]; else ++s.motivation_unlabeled;
  }
  return s;
}

std::string LabelSummary::describe() const {
  std::string out = std::to_string(total) + " users; user_type:";
  for (std::size_t c = 0; c < kNumClasses; ++c)
    out += std::string(c ? "," : "") + " " + std::string(class_name(Task::UserType, c)) + " " + percent(type[c], total);
  if (type_unlabeled) out += ", unlabeled " + percent(type_unlabeled, total);
  out += "; user_motivation:";
  for (std::size_t c = 0; c < kNumClasses; ++c)
    out += std::string(c ? "," : "") + " " + std::string(class_name(Task::UserMotivation, c)) + " " +
           percent(motivation[c], total);
  if (motivation_unlabeled) out += ", unlabeled " + percent(motivation_unlabeled, total);
  return out;
}

}  // namespace yun
