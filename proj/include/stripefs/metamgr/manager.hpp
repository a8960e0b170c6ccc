#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "stripefs/layout/distribution.hpp"
#include "stripefs/metamgr/partition.hpp"

namespace stripefs::metamgr {

class Journal;

struct FileMeta {
  std::string path;
  std::uint64_t handle = 0;
  layout::Distribution dist;
  std::vector<NodeId> iod_list;
  std::uint64_t logical_size = 0;
  std::string partition;

  bool operator==(const FileMeta&) const = default;
};

/// Sub-file administration on the daemons, as seen from the manager.
class DaemonAdmin {
 public:
  virtual ~DaemonAdmin() = default;
  virtual void create_subfile(NodeId iod, std::uint64_t handle) = 0;
  virtual void remove_subfile(NodeId iod, std::uint64_t handle) = 0;
};

/// Namespace and file records for a set of partitions. Mutations are
/// serialized; lookups share the lock.
class Manager {
 public:
  /// Replays the journal when journal_path names an existing file.
  Manager(std::vector<Partition> partitions, DaemonAdmin& admin, std::optional<std::string> journal_path = {});
  ~Manager();

  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  /// An empty partition name selects the first partition.
  FileMeta create_file(const std::string& path, const layout::Distribution& dist, const std::string& partition = {});
  FileMeta open(const std::string& path) const;
  void remove(const std::string& path);
  std::uint64_t update_size(std::uint64_t handle, std::uint64_t high_water);
  std::vector<FileMeta> list() const;

  const std::vector<Partition>& partitions() const noexcept { return partitions_; }
  std::uint64_t next_handle() const;

  /// Canonical text rendering of every record; equal states give equal bytes.
  std::string dump() const;

 private:
  const Partition& find_partition(const std::string& name) const;
  void apply_create(FileMeta meta);
  void apply_remove(std::uint64_t handle);
  void apply_size(std::uint64_t handle, std::uint64_t size);

  std::vector<Partition> partitions_;
  DaemonAdmin& admin_;
  std::unique_ptr<Journal> journal_;

  mutable std::shared_mutex mu_;
  std::map<std::string, std::uint64_t> by_path_;
  std::map<std::uint64_t, FileMeta> files_;
  std::uint64_t next_handle_ = 1;
};

}  // namespace stripefs::metamgr
