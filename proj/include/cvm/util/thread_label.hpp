#pragma once

#include <string>

namespace cvm {

// Human-readable label of the calling thread, used in trace records.
// Defaults to "thread-<n>" with n assigned on first use.
const std::string& this_thread_label();
void set_this_thread_label(std::string label);

}  // namespace cvm
