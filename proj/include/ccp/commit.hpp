#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace ccp {

using UtcSeconds = std::chrono::sys_seconds;

/// One parsed commit. `author_id` is the lowercased author email.
struct CommitRecord {
  std::string repo_id;
  std::string hash;
  std::string author_id;
  UtcSeconds timestamp{};
  std::string message;
  std::vector<std::string> files;
  bool is_merge = false;

  bool operator==(const CommitRecord&) const = default;
};

/// UTC calendar year of an instant.
inline int utc_year(UtcSeconds t) {
  const auto days = std::chrono::floor<std::chrono::days>(t);
  return static_cast<int>(std::chrono::year_month_day{days}.year());
}

}  // namespace ccp
