#include "stripefs/iod/backing_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>

#include "stripefs/common/error.hpp"

namespace stripefs::iod {

std::string subfile_name(std::uint64_t handle) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx.sub", static_cast<unsigned long long>(handle));
  return buf;
}

// ---------------------------------------------------------------- MemoryStore

void MemoryStore::create(std::uint64_t handle) {
  std::lock_guard lock(mu_);
  if (!files_.try_emplace(handle).second) raise(Errc::exists, subfile_name(handle));
}

void MemoryStore::remove(std::uint64_t handle) {
  std::lock_guard lock(mu_);
  if (files_.erase(handle) == 0) raise(Errc::no_such_file, subfile_name(handle));
}

bool MemoryStore::exists(std::uint64_t handle) const {
  std::lock_guard lock(mu_);
  return files_.contains(handle);
}

void MemoryStore::read(std::uint64_t handle, std::uint64_t offset, MutableByteView out) {
  std::lock_guard lock(mu_);
  auto it = files_.find(handle);
  if (it == files_.end()) raise(Errc::no_such_file, subfile_name(handle));
  std::uint64_t pos = 0;
  while (pos < out.size()) {
    const std::uint64_t abs = offset + pos;
    const std::uint64_t within = abs % kChunk;
    const std::uint64_t take = std::min<std::uint64_t>(kChunk - within, out.size() - pos);
    auto chunk = it->second.chunks.find(abs / kChunk);
    if (chunk == it->second.chunks.end()) {
      std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(pos), take, 0);
    } else {
      std::copy_n(chunk->second.begin() + static_cast<std::ptrdiff_t>(within), take,
                  out.begin() + static_cast<std::ptrdiff_t>(pos));
    }
    pos += take;
  }
}

void MemoryStore::write(std::uint64_t handle, std::uint64_t offset, ByteView data) {
  std::lock_guard lock(mu_);
  auto it = files_.find(handle);
  if (it == files_.end()) raise(Errc::no_such_file, subfile_name(handle));
  std::uint64_t pos = 0;
  while (pos < data.size()) {
    const std::uint64_t abs = offset + pos;
    const std::uint64_t within = abs % kChunk;
    const std::uint64_t take = std::min<std::uint64_t>(kChunk - within, data.size() - pos);
    auto& chunk = it->second.chunks[abs / kChunk];
    if (chunk.empty()) chunk.assign(kChunk, 0);
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(pos), take,
                chunk.begin() + static_cast<std::ptrdiff_t>(within));
    pos += take;
  }
  if (!data.empty()) it->second.size = std::max(it->second.size, offset + data.size());
}

std::uint64_t MemoryStore::size(std::uint64_t handle) const {
  std::lock_guard lock(mu_);
  auto it = files_.find(handle);
  if (it == files_.end()) raise(Errc::no_such_file, subfile_name(handle));
  return it->second.size;
}

// ------------------------------------------------------------------ FileStore

FileStore::FileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) raise(Errc::storage, "cannot create " + dir_.string() + ": " + ec.message());
  // Sub-files left by an earlier run stay reachable.
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    const auto name = entry.path().filename().string();
    if (name.size() != 20 || !name.ends_with(".sub")) continue;
    const auto handle = std::stoull(name.substr(0, 16), nullptr, 16);
    int fd = ::open(entry.path().c_str(), O_RDWR | O_CLOEXEC);
    if (fd >= 0) fds_.emplace(handle, fd);
  }
}

FileStore::~FileStore() {
  for (auto& [_, fd] : fds_) ::close(fd);
}

int FileStore::fd_of(std::uint64_t handle) const {
  auto it = fds_.find(handle);
  if (it == fds_.end()) raise(Errc::no_such_file, subfile_name(handle));
  return it->second;
}

void FileStore::create(std::uint64_t handle) {
  std::lock_guard lock(mu_);
  if (fds_.contains(handle)) raise(Errc::exists, subfile_name(handle));
  int fd = ::open(path_of(handle).c_str(), O_RDWR | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) {
    raise(errno == EEXIST ? Errc::exists : Errc::storage, path_of(handle).string() + ": " + std::strerror(errno));
  }
  fds_.emplace(handle, fd);
}

void FileStore::remove(std::uint64_t handle) {
  std::lock_guard lock(mu_);
  int fd = fd_of(handle);
  ::close(fd);
  fds_.erase(handle);
  if (::unlink(path_of(handle).c_str()) != 0) {
    raise(Errc::storage, path_of(handle).string() + ": " + std::strerror(errno));
  }
}

bool FileStore::exists(std::uint64_t handle) const {
  std::lock_guard lock(mu_);
  return fds_.contains(handle);
}

void FileStore::read(std::uint64_t handle, std::uint64_t offset, MutableByteView out) {
  int fd;
  {
    std::lock_guard lock(mu_);
    fd = fd_of(handle);
  }
  std::size_t done = 0;
  while (done < out.size()) {
    ssize_t r = ::pread(fd, out.data() + done, out.size() - done, static_cast<off_t>(offset + done));
    if (r < 0) {
      if (errno == EINTR) continue;
      raise(Errc::storage, "read " + subfile_name(handle) + ": " + std::strerror(errno));
    }
    if (r == 0) break;
    done += static_cast<std::size_t>(r);
  }
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(done), out.end(), 0);
}

void FileStore::write(std::uint64_t handle, std::uint64_t offset, ByteView data) {
  int fd;
  {
    std::lock_guard lock(mu_);
    fd = fd_of(handle);
  }
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t w = ::pwrite(fd, data.data() + done, data.size() - done, static_cast<off_t>(offset + done));
    if (w < 0) {
      if (errno == EINTR) continue;
      raise(Errc::storage, "write " + subfile_name(handle) + ": " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(w);
  }
}

std::uint64_t FileStore::size(std::uint64_t handle) const {
  std::lock_guard lock(mu_);
  struct stat st {};
  if (::fstat(fd_of(handle), &st) != 0) raise(Errc::storage, std::strerror(errno));
  return static_cast<std::uint64_t>(st.st_size);
}

}  // namespace stripefs::iod

namespace stripefs::iod {

std::vector<std::uint64_t> MemoryStore::handles() const {
  std::lock_guard lock(mu_);
  std::vector<std::uint64_t> out;
  for (const auto& [h, _] : files_) out.push_back(h);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> FileStore::handles() const {
  std::lock_guard lock(mu_);
  std::vector<std::uint64_t> out;
  for (const auto& [h, _] : fds_) out.push_back(h);
  return out;
}

}  // namespace stripefs::iod
