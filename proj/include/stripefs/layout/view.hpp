#pragma once

#include <cstdint>
#include <variant>
#include <vector>

namespace stripefs::layout {

/// A byte range in logical file space.
struct FileExtent {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  std::uint64_t end() const noexcept { return offset + length; }
  bool operator==(const FileExtent&) const = default;
};

struct FullView {
  bool operator==(const FullView&) const = default;
};

/// View byte v maps to file byte first_offset + (v / block) * stride + v % block.
struct BlockCyclicView {
  std::uint64_t first_offset = 0;
  std::uint64_t block = 1;
  std::uint64_t stride = 1;

  bool operator==(const BlockCyclicView&) const = default;
};

/// Concatenation of strictly increasing, non-overlapping file extents.
struct ExtentListView {
  std::vector<FileExtent> extents;

  bool operator==(const ExtentListView&) const = default;
};

/// Sequential window onto a possibly non-contiguous subset of a file.
class View {
 public:
  using Shape = std::variant<FullView, BlockCyclicView, ExtentListView>;

  View() = default;
  View(FullView v) : shape_(v) {}
  View(BlockCyclicView v) : shape_(v) {}
  View(ExtentListView v) : shape_(std::move(v)) {}

  static View full() { return FullView{}; }

  const Shape& shape() const noexcept { return shape_; }
  bool is_full() const noexcept { return std::holds_alternative<FullView>(shape_); }

  /// Only extent-list views have a finite size.
  bool bounded() const noexcept { return std::holds_alternative<ExtentListView>(shape_); }
  std::uint64_t size() const noexcept;

  /// Number of view bytes whose file offset falls below file_size. Because
  /// the mapping is increasing, these form a prefix of the view.
  std::uint64_t length_within(std::uint64_t file_size) const noexcept;

  void validate() const;

  bool operator==(const View&) const = default;

 private:
  Shape shape_ = FullView{};
};

}  // namespace stripefs::layout
