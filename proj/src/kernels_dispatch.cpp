#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "ces/kernels.hpp"

namespace ces::simd {
namespace {

Backend detect_default() {
  if (const char* env = std::getenv("CES_KERNEL")) {
    const std::string_view v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && avx2_supported()) return Backend::avx2;
    if (v != "auto" && v != "avx2") return avx2_supported() ? Backend::avx2 : Backend::scalar;
  }
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_state() {
  static std::atomic<Backend> state{detect_default()};
  return state;
}

}  // namespace

Backend active_backend() { return backend_state().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported()) {
    throw std::runtime_error("AVX2 kernels requested but not supported by this CPU");
  }
  backend_state().store(b, std::memory_order_relaxed);
}

bool set_backend(std::string_view name) {
  if (name == "scalar") {
    set_backend(Backend::scalar);
    return true;
  }
  if (name == "avx2") {
    if (!avx2_supported()) return false;
    set_backend(Backend::avx2);
    return true;
  }
  if (name == "auto") {
    backend_state().store(avx2_supported() ? Backend::avx2 : Backend::scalar,
                          std::memory_order_relaxed);
    return true;
  }
  return false;
}

const char* backend_name() {
  return active_backend() == Backend::avx2 ? "avx2" : "scalar";
}

const KernelTable& k() {
  return active_backend() == Backend::avx2 ? avx2_table() : scalar_table();
}

}  // namespace ces::simd
