#include "myofuzz/simd.hpp"

namespace myofuzz::simd {

const KernelTable* avx2_kernels() noexcept { return nullptr; }

}  // namespace myofuzz::simd
