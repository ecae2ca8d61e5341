// SPDX-License-Identifier: Apache-2.0

#include "gsgd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gsgd::kernels {
namespace {

const Ops* pick_backend() {
  const char* forced = std::getenv("GSGD_KERNEL_BACKEND");
  if (forced != nullptr) {
    if (std::strcmp(forced, "scalar") == 0) return &scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
    if (std::strcmp(forced, "avx2") == 0 && __builtin_cpu_supports("avx2")) return &avx2_ops();
#endif
#if defined(__aarch64__)
    if (std::strcmp(forced, "neon") == 0) return &neon_ops();
#endif
    return &scalar_ops();  // unknown or unsupported request
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return &avx2_ops();
#endif
#if defined(__aarch64__)
  return &neon_ops();
#endif
  return &scalar_ops();
}

}  // namespace

const Ops& active_ops() {
  static const Ops* ops = pick_backend();
  return *ops;
}

std::vector<const Ops*> available_backends() {
  std::vector<const Ops*> out{&scalar_ops()};
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) out.push_back(&avx2_ops());
#endif
#if defined(__aarch64__)
  out.push_back(&neon_ops());
#endif
  return out;
}

}  // namespace gsgd::kernels
