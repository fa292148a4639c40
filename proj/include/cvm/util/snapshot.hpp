#pragma once

#include <atomic>
#include <memory>
#include <utility>

namespace cvm {

// Read-copy-update cell: readers take a reference-counted immutable
// snapshot, writers publish a whole new value. A reader keeps whatever
// snapshot it loaded for as long as it holds the pointer.
template <typename T>
class SnapshotCell {
 public:
  SnapshotCell() : current_(std::make_shared<const T>()) {}
  explicit SnapshotCell(std::shared_ptr<const T> initial) : current_(std::move(initial)) {}

  SnapshotCell(const SnapshotCell&) = delete;
  SnapshotCell& operator=(const SnapshotCell&) = delete;

  std::shared_ptr<const T> load() const { return std::atomic_load(&current_); }

  void store(std::shared_ptr<const T> next) { std::atomic_store(&current_, std::move(next)); }

 private:
  std::shared_ptr<const T> current_;
};

}  // namespace cvm
