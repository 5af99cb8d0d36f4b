#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace nodal_lab {

/// Worker cap: NODAL_LAB_THREADS when set to a positive integer, else the hardware count.
inline int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("NODAL_LAB_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
  }
  return hw;
}

/// out[i] = f(i) for i < count. Each slot is written by exactly one task, so the
/// result never depends on how many workers ran or in which order.
/// The first exception (lowest index) is rethrown after all workers finish.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, F&& f, int workers = worker_count()) {
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (nw <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace nodal_lab
