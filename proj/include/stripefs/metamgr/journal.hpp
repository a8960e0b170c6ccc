#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "json.hpp"

namespace stripefs::metamgr {

/// Append-only record file, one JSON object per line. A torn final line from
/// an interrupted append is ignored on replay and cut off before the next
/// append.
class Journal {
 public:
  explicit Journal(std::string path);
  ~Journal();

  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  /// Feeds every complete record to apply, oldest first. Must run before
  /// the first append.
  void replay(const std::function<void(const nlohmann::json&)>& apply);
  /// With sync set the record is on stable storage when this returns.
  void append(const nlohmann::json& record, bool sync);

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  int fd_ = -1;
};

}  // namespace stripefs::metamgr
