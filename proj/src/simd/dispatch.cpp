#include "myofuzz/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "myofuzz/error.hpp"

namespace myofuzz::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("MYOFUZZ_SIMD")) {
    const std::string want{env};
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return avx2_kernels() != nullptr && cpu_has_avx2();
  }
  return false;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa))
    throw ConfigError("SIMD variant '" + std::string(isa_name(isa)) + "' is not available");
  current().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernels() noexcept {
  return active_isa() == Isa::avx2 ? *avx2_kernels() : scalar_kernels();
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("simd::dot: length mismatch");
  return kernels().dot(a.data(), b.data(), a.size());
}

double sum_squares(std::span<const double> x) { return kernels().sum_squares(x.data(), x.size()); }

double sum_abs(std::span<const double> x) { return kernels().sum_abs(x.data(), x.size()); }

void squared_distances(std::span<const double> query, std::span<const double> rows,
                       std::size_t dim, std::span<double> out) {
  if (query.size() != dim || rows.size() != out.size() * dim)
    throw ContractError("simd::squared_distances: shape mismatch");
  kernels().squared_distances(query.data(), rows.data(), out.size(), dim, out.data());
}

void weighted_squared_distances(std::span<const double> query, std::span<const double> rows,
                                std::span<const double> weights, std::size_t dim,
                                std::span<double> out) {
  if (query.size() != dim || weights.size() != dim || rows.size() != out.size() * dim)
    throw ContractError("simd::weighted_squared_distances: shape mismatch");
  kernels().weighted_squared_distances(query.data(), rows.data(), weights.data(), out.size(),
                                       dim, out.data());
}

}  // namespace myofuzz::simd
