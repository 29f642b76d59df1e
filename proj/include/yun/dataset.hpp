#pragma once

// Newline-delimited JSON user records.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "yun/records.hpp"

namespace yun {

struct LabelSummary {
  std::array<std::size_t, kNumClasses> type{};
  std::array<std::size_t, kNumClasses> motivation{};
  std::size_t type_unlabeled = 0;
  std::size_t motivation_unlabeled = 0;
  std::size_t total = 0;

  /// "practitioner 42.0%, promotional 21.0%, ..." per task.
  std::string describe() const;
};

struct IngestResult {
  std::vector<UserRecord> records;
  std::vector<std::string> errors;  // "line N: ..." for every rejected line
  LabelSummary summary;
};

/// Parses one JSON object into a record; throws ValidationError.
UserRecord parse_record(const std::string& line);
std::string serialize_record(const UserRecord& record);

/// Validates every line. In strict mode any error throws a ValidationError
/// listing all of them; otherwise bad lines are skipped and reported.
IngestResult ingest(const std::filesystem::path& path, bool lenient = false);

void write_records(const std::filesystem::path& path, const std::vector<UserRecord>& records);

LabelSummary summarize(const std::vector<UserRecord>& records);

}  // namespace yun
