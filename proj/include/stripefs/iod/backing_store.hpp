#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "stripefs/common/bytes.hpp"

namespace stripefs::iod {

/// Durable byte storage for sub-files. Reads past the end and reads of holes
/// return zero bytes.
class BackingStore {
 public:
  virtual ~BackingStore() = default;

  virtual void create(std::uint64_t handle) = 0;
  virtual void remove(std::uint64_t handle) = 0;
  virtual bool exists(std::uint64_t handle) const = 0;
  virtual void read(std::uint64_t handle, std::uint64_t offset, MutableByteView out) = 0;
  virtual void write(std::uint64_t handle, std::uint64_t offset, ByteView data) = 0;
  virtual std::uint64_t size(std::uint64_t handle) const = 0;
  virtual std::vector<std::uint64_t> handles() const = 0;
};

/// `<16 hex digits>.sub`
std::string subfile_name(std::uint64_t handle);

/// Sparse in-memory store, kept in 64 KiB chunks.
class MemoryStore final : public BackingStore {
 public:
  void create(std::uint64_t handle) override;
  void remove(std::uint64_t handle) override;
  bool exists(std::uint64_t handle) const override;
  void read(std::uint64_t handle, std::uint64_t offset, MutableByteView out) override;
  void write(std::uint64_t handle, std::uint64_t offset, ByteView data) override;
  std::uint64_t size(std::uint64_t handle) const override;
  std::vector<std::uint64_t> handles() const override;

 private:
  static constexpr std::uint64_t kChunk = 64 * 1024;
  struct File {
    std::unordered_map<std::uint64_t, Bytes> chunks;
    std::uint64_t size = 0;
  };
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, File> files_;
};

/// One regular (sparse) file per sub-file under a storage directory.
class FileStore final : public BackingStore {
 public:
  explicit FileStore(std::filesystem::path dir);
  ~FileStore() override;

  void create(std::uint64_t handle) override;
  void remove(std::uint64_t handle) override;
  bool exists(std::uint64_t handle) const override;
  void read(std::uint64_t handle, std::uint64_t offset, MutableByteView out) override;
  void write(std::uint64_t handle, std::uint64_t offset, ByteView data) override;
  std::uint64_t size(std::uint64_t handle) const override;
  std::vector<std::uint64_t> handles() const override;

  std::filesystem::path path_of(std::uint64_t handle) const { return dir_ / subfile_name(handle); }

 private:
  int fd_of(std::uint64_t handle) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::uint64_t, int> fds_;
};

}  // namespace stripefs::iod
