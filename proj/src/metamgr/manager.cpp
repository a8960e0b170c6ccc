#include "stripefs/metamgr/manager.hpp"

#include <algorithm>
#include <mutex>

#include "stripefs/common/error.hpp"
#include "stripefs/metamgr/journal.hpp"

namespace stripefs::metamgr {

using nlohmann::json;

namespace {

json dist_to_json(const layout::Distribution& dist) {
  return std::visit(
      [](const auto& rule) -> json {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, layout::StripeSpec>) {
          return {{"kind", "rr"}, {"stripe", rule.stripe_size}, {"n_iods", rule.n_iods}, {"base", rule.base_iod}};
        } else if constexpr (std::is_same_v<T, layout::BlockCyclic>) {
          return {{"kind", "bc"}, {"block", rule.block}, {"n_iods", rule.n_iods}};
        } else {
          json extents = json::array();
          for (const auto& e : rule.extents) extents.push_back({e.iod, e.length});
          return {{"kind", "irr"}, {"extents", extents}};
        }
      },
      dist.rule());
}

layout::Distribution dist_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "rr") {
    return layout::StripeSpec{j.at("stripe").get<std::uint64_t>(), j.at("n_iods").get<std::uint32_t>(),
                              j.at("base").get<std::uint32_t>()};
  }
  if (kind == "bc") return layout::BlockCyclic{j.at("block").get<std::uint64_t>(), j.at("n_iods").get<std::uint32_t>()};
  if (kind == "irr") {
    layout::Irregular irr;
    for (const auto& e : j.at("extents")) irr.extents.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint64_t>()});
    return irr;
  }
  raise(Errc::storage, "unknown distribution kind '" + kind + "' in journal");
}

json meta_to_json(const FileMeta& m) {
  json iods = json::array();
  for (auto n : m.iod_list) iods.push_back(n.value);
  return {{"path", m.path}, {"handle", m.handle},       {"dist", dist_to_json(m.dist)},
          {"iods", iods},   {"size", m.logical_size},   {"partition", m.partition}};
}

FileMeta meta_from_json(const json& j) {
  FileMeta m;
  m.path = j.at("path").get<std::string>();
  m.handle = j.at("handle").get<std::uint64_t>();
  m.dist = dist_from_json(j.at("dist"));
  for (const auto& n : j.at("iods")) m.iod_list.push_back(NodeId{n.get<std::uint32_t>()});
  m.logical_size = j.at("size").get<std::uint64_t>();
  m.partition = j.at("partition").get<std::string>();
  return m;
}

}  // namespace

Manager::Manager(std::vector<Partition> partitions, DaemonAdmin& admin, std::optional<std::string> journal_path)
    : partitions_(std::move(partitions)), admin_(admin) {
  if (partitions_.empty()) raise(Errc::config, "manager needs at least one partition");
  if (!journal_path) return;
  journal_ = std::make_unique<Journal>(*journal_path);
  journal_->replay([this](const json& record) {
    try {
      const auto op = record.at("op").get<std::string>();
      if (op == "create") {
        apply_create(meta_from_json(record.at("meta")));
      } else if (op == "remove") {
        apply_remove(record.at("handle").get<std::uint64_t>());
      } else if (op == "size") {
        apply_size(record.at("handle").get<std::uint64_t>(), record.at("size").get<std::uint64_t>());
      } else {
        raise(Errc::storage, "unknown journal record '" + op + "'");
      }
    } catch (const json::exception& e) {
      raise(Errc::storage, std::string("malformed journal record: ") + e.what());
    }
  });
}

Manager::~Manager() = default;

void Manager::apply_create(FileMeta meta) {
  next_handle_ = std::max(next_handle_, meta.handle + 1);
  by_path_[meta.path] = meta.handle;
  files_[meta.handle] = std::move(meta);
}

void Manager::apply_remove(std::uint64_t handle) {
  auto it = files_.find(handle);
  if (it == files_.end()) return;
  by_path_.erase(it->second.path);
  files_.erase(it);
}

void Manager::apply_size(std::uint64_t handle, std::uint64_t size) {
  auto it = files_.find(handle);
  if (it != files_.end()) it->second.logical_size = std::max(it->second.logical_size, size);
}

const Partition& Manager::find_partition(const std::string& name) const {
  if (name.empty()) return partitions_.front();
  for (const auto& p : partitions_) {
    if (p.name == name) return p;
  }
  raise(Errc::config, "no partition named '" + name + "'");
}

FileMeta Manager::create_file(const std::string& path, const layout::Distribution& dist, const std::string& partition) {
  if (path.empty()) raise(Errc::validation, "empty path");
  dist.validate();
  std::unique_lock lock(mu_);
  if (by_path_.contains(path)) raise(Errc::exists, path);
  const auto& part = find_partition(partition);
  const auto n = dist.n_iods();
  if (n > part.nodes.size()) {
    raise(Errc::capacity, "distribution needs " + std::to_string(n) + " daemons, partition '" + part.name + "' has " +
                              std::to_string(part.nodes.size()));
  }

  FileMeta meta;
  meta.path = path;
  meta.handle = next_handle_;
  meta.dist = dist;
  meta.iod_list.assign(part.nodes.begin(), part.nodes.begin() + n);
  meta.partition = part.name;

  std::size_t made = 0;
  try {
    for (; made < meta.iod_list.size(); ++made) {
      try {
        admin_.create_subfile(meta.iod_list[made], meta.handle);
      } catch (const Error& e) {
        // A sub-file left behind by a create that never reached the journal.
        if (e.code() != Errc::exists) throw;
        admin_.remove_subfile(meta.iod_list[made], meta.handle);
        admin_.create_subfile(meta.iod_list[made], meta.handle);
      }
    }
  } catch (const Error& e) {
    for (std::size_t i = 0; i < made; ++i) {
      try {
        admin_.remove_subfile(meta.iod_list[i], meta.handle);
      } catch (const Error&) {
      }
    }
    raise(Errc::create_failed, path + ": daemon " + transport::to_string(meta.iod_list[made]) + ": " + e.what());
  }

  if (journal_) journal_->append({{"op", "create"}, {"meta", meta_to_json(meta)}}, true);
  apply_create(meta);
  return meta;
}

FileMeta Manager::open(const std::string& path) const {
  std::shared_lock lock(mu_);
  auto it = by_path_.find(path);
  if (it == by_path_.end()) raise(Errc::no_such_file, path);
  return files_.at(it->second);
}

void Manager::remove(const std::string& path) {
  std::unique_lock lock(mu_);
  auto it = by_path_.find(path);
  if (it == by_path_.end()) raise(Errc::no_such_file, path);
  FileMeta meta = files_.at(it->second);
  if (journal_) journal_->append({{"op", "remove"}, {"handle", meta.handle}}, true);
  apply_remove(meta.handle);
  // Handles are never reused, so a sub-file that cannot go now is only
  // wasted space.
  for (auto node : meta.iod_list) {
    try {
      admin_.remove_subfile(node, meta.handle);
    } catch (const Error&) {
    }
  }
}

std::uint64_t Manager::update_size(std::uint64_t handle, std::uint64_t high_water) {
  std::unique_lock lock(mu_);
  auto it = files_.find(handle);
  if (it == files_.end()) raise(Errc::no_such_file, "handle " + std::to_string(handle));
  if (high_water > it->second.logical_size) {
    if (journal_) journal_->append({{"op", "size"}, {"handle", handle}, {"size", high_water}}, false);
    it->second.logical_size = high_water;
  }
  return it->second.logical_size;
}

std::vector<FileMeta> Manager::list() const {
  std::shared_lock lock(mu_);
  std::vector<FileMeta> out;
  for (const auto& [_, handle] : by_path_) out.push_back(files_.at(handle));
  return out;
}

std::uint64_t Manager::next_handle() const {
  std::shared_lock lock(mu_);
  return next_handle_;
}

std::string Manager::dump() const {
  std::shared_lock lock(mu_);
  json files = json::array();
  for (const auto& [_, meta] : files_) files.push_back(meta_to_json(meta));
  return json{{"next_handle", next_handle_}, {"files", files}}.dump(1) + "\n";
}

}  // namespace stripefs::metamgr
