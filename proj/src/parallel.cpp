#include "declab/parallel.hpp"

#include <atomic>

namespace declab {

namespace {
std::atomic<int> g_workers{0};
}

int worker_count() {
  const int n = g_workers.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_worker_count(int n) { g_workers.store(n > 0 ? n : 0); }

}  // namespace declab
