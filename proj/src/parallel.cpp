#include "myofuzz/parallel.hpp"

namespace myofuzz {

std::size_t default_jobs() noexcept {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace myofuzz
