#include "yun/records.hpp"

#include <stdexcept>

#include "yun/errors.hpp"

namespace yun {

namespace {

constexpr std::array<std::string_view, kNumClasses> kTypeNames = {"practitioner", "promotional", "other"};
constexpr std::array<std::string_view, kNumClasses> kMotivationNames = {"health", "spiritual", "other"};

}  // namespace

std::string_view task_name(Task task) {
  return task == Task::UserType ? "user_type" : "user_motivation";
}

Task parse_task(std::string_view name) {
  if (name == "user_type") return Task::UserType;
  if (name == "user_motivation") return Task::UserMotivation;
  throw ValidationError("unknown task '" + std::string(name) + "' (expected user_type or user_motivation)");
}

const std::array<std::string_view, kNumClasses>& class_names(Task task) {
  return task == Task::UserType ? kTypeNames : kMotivationNames;
}

std::string_view class_name(Task task, std::size_t cls) {
  if (cls >= kNumClasses) throw std::out_of_range("class id " + std::to_string(cls));
  return class_names(task)[cls];
}

std::optional<std::size_t> parse_class(Task task, std::string_view name) {
  const auto& names = class_names(task);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> UserRecord::label(Task task) const {
  if (task == Task::UserType) {
    if (!type_label) return std::nullopt;
    return static_cast<std::size_t>(*type_label);
  }
  if (!motivation_label) return std::nullopt;
  return static_cast<std::size_t>(*motivation_label);
}

}  // namespace yun
