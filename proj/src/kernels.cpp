#include "gcs/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gcs::kernels {

namespace {

const Ops* select() {
  if (const char* env = std::getenv("GCS_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2_ops() != nullptr) return avx2_ops();
  }
  if (const Ops* simd = avx2_ops()) return simd;
  return &scalar_ops();
}

}  // namespace

const Ops& active() {
  static const Ops* chosen = select();
  return *chosen;
}

std::string_view active_name() { return active().name; }

}  // namespace gcs::kernels
