#include "occfof/parallel.hpp"

namespace occfof {

namespace {
thread_local unsigned t_max_workers = 0;
}

unsigned max_workers() noexcept { return t_max_workers; }

void set_max_workers(unsigned workers) noexcept { t_max_workers = workers; }

unsigned resolved_workers() noexcept {
  if (t_max_workers > 0) return t_max_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace occfof
