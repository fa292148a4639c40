#include "cvm/util/thread_label.hpp"

#include <atomic>

namespace cvm {

namespace {
std::atomic<unsigned> next_thread_number{1};

std::string& label_slot() {
  thread_local std::string label;
  return label;
}
}  // namespace

const std::string& this_thread_label() {
  auto& label = label_slot();
  if (label.empty()) label = "thread-" + std::to_string(next_thread_number.fetch_add(1));
  return label;
}

void set_this_thread_label(std::string label) { label_slot() = std::move(label); }

}  // namespace cvm
