#include <cstdlib>
#include <stdexcept>
#include <string>

#include "pdquad/simd.hpp"

namespace pdq::simd {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::bond_force_sum, &scalar::bond_blocks, &scalar::bond_strains,
                              &scalar::spmv};

#if defined(PDQ_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::bond_force_sum, &avx2::bond_blocks, &avx2::bond_strains,
                            &avx2::spmv};
#endif

const KernelTable& select() {
  if (const char* env = std::getenv("PDQ_SIMD"); env && std::string(env) == "scalar") return kScalar;
#if defined(PDQ_HAVE_AVX2)
  if (supported(Isa::avx2)) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(PDQ_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

const KernelTable& kernels_for(Isa isa) {
  if (!supported(isa)) throw std::runtime_error("ISA not supported on this CPU: " + std::string(to_string(isa)));
#if defined(PDQ_HAVE_AVX2)
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace pdq::simd
