#include "stripefs/metamgr/journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stripefs/common/error.hpp"

namespace stripefs::metamgr {

Journal::Journal(std::string path) : path_(std::move(path)) {}

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

void Journal::replay(const std::function<void(const nlohmann::json&)>& apply) {
  std::string text;
  {
    std::ifstream in(path_, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
  }

  std::size_t pos = 0;
  std::size_t good_end = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    ++line_no;
    auto line = std::string_view(text).substr(pos, nl - pos);
    if (!line.empty()) {
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        raise(Errc::storage, path_ + ":" + std::to_string(line_no) + ": bad record: " + e.what());
      }
      apply(record);
    }
    pos = nl + 1;
    good_end = pos;
  }

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) raise(Errc::storage, path_ + ": " + std::strerror(errno));
  if (::ftruncate(fd_, static_cast<off_t>(good_end)) != 0 || ::lseek(fd_, 0, SEEK_END) < 0) {
    raise(Errc::storage, path_ + ": " + std::strerror(errno));
  }
}

void Journal::append(const nlohmann::json& record, bool sync) {
  if (fd_ < 0) raise(Errc::storage, "journal not opened");
  std::string line = record.dump() + "\n";
  std::size_t done = 0;
  while (done < line.size()) {
    auto n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      raise(Errc::storage, path_ + ": " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  if (sync && ::fdatasync(fd_) != 0) raise(Errc::storage, path_ + ": " + std::strerror(errno));
}

}  // namespace stripefs::metamgr
