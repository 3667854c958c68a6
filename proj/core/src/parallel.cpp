#include "mbf/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "mbf/errors.hpp"

namespace mbf {

int resolve_parallelism(int hint) {
  if (const char* env = std::getenv("MBF_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
      // fall through to the hint
    }
  }
  if (hint >= 1) return hint;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw >= 1 ? static_cast<int>(hw) : 1;
}

void parallel_for(long n, int workers, const std::function<void(long, long, int)>& fn) {
  if (n <= 0) return;
  if (workers < 1) workers = 1;
  if (workers > n) workers = static_cast<int>(n);
  if (workers == 1) {
    fn(0, n, 0);
    return;
  }

  const long chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const long begin = w * chunk;
    const long end = std::min(n, begin + chunk);
    threads.emplace_back([&, begin, end, w] {
      try {
        if (begin < end) fn(begin, end, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace mbf
