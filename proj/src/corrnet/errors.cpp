#include "corrnet/errors.hpp"

#include <iostream>
#include <mutex>

namespace corrnet {

namespace {
std::mutex g_log_mutex;
}

void log_warning(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "corrnet: warning: " << msg << "\n";
}

}  // namespace corrnet
