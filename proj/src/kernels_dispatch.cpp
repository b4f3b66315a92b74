#include <cstdlib>
#include <string>

#include "dgm/kernels.hpp"

namespace dgm::kernels {

#ifdef DGM_HAVE_AVX2
const Table& avx2_table_impl();
#endif

const Table* avx2_table() {
#if defined(DGM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table_impl() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const Table* by_name(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "auto") {
    const Table* fast = avx2_table();
    return fast ? fast : &scalar_table();
  }
  return nullptr;
}

const Table*& current() {
  static const Table* table = [] {
    const char* env = std::getenv("DGM_KERNELS");
    const Table* chosen = env ? by_name(env) : nullptr;
    return chosen ? chosen : by_name("auto");
  }();
  return table;
}

}  // namespace

const Table& active() { return *current(); }

bool select(std::string_view name) {
  const Table* table = by_name(name);
  if (!table) return false;
  current() = table;
  return true;
}

}  // namespace dgm::kernels
