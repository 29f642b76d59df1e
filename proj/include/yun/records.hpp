#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace yun {

inline constexpr std::size_t kNumClasses = 3;

enum class Task { UserType, UserMotivation };

enum class UserType { Practitioner = 0, Promotional = 1, Other = 2 };
enum class Motivation { Health = 0, Spiritual = 1, Other = 2 };

std::string_view task_name(Task task);
Task parse_task(std::string_view name);

/// Label strings for a task, indexed by class id.
const std::array<std::string_view, kNumClasses>& class_names(Task task);
std::string_view class_name(Task task, std::size_t cls);
/// Class id for a label string; nullopt when unknown.
std::optional<std::size_t> parse_class(Task task, std::string_view name);

/// One user's raw views plus gold labels.
struct UserRecord {
  std::string user_id;
  std::optional<std::string> description;
  std::optional<std::string> location;
  std::vector<std::string> tweets;         // timestamp order
  std::vector<std::string> mentioned_ids;  // users this user mentions or retweets
  std::optional<UserType> type_label;
  std::optional<Motivation> motivation_label;

  /// Gold class id for the task, if labeled.
  std::optional<std::size_t> label(Task task) const;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

}  // namespace yun
