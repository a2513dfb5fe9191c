#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "trajstyle/error.hpp"

namespace trajstyle::numkit::kernels {

const KernelTable* avx2_table() { return avx2_table_compiled(); }
const KernelTable* neon_table() { return neon_table_compiled(); }

namespace {

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return &scalar_table();
    case Backend::avx2:
      return avx2_table();
    case Backend::neon:
      return neon_table();
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("TRAJSTYLE_KERNELS")) {
    const std::string choice(env);
    const KernelTable* forced = nullptr;
    if (choice == "scalar") forced = table_for(Backend::scalar);
    if (choice == "avx2") forced = table_for(Backend::avx2);
    if (choice == "neon") forced = table_for(Backend::neon);
    if (forced) return forced;
  }
  return table_for(best_backend());
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

bool backend_available(Backend backend) { return table_for(backend) != nullptr; }

Backend best_backend() {
  if (avx2_table()) return Backend::avx2;
  if (neon_table()) return Backend::neon;
  return Backend::scalar;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void select_backend(Backend backend) {
  const KernelTable* table = table_for(backend);
  if (!table) {
    throw ValueError("kernel backend '" + std::string(backend_name(backend)) +
                     "' is not available on this machine");
  }
  active_slot().store(table, std::memory_order_release);
}

ScopedBackend::ScopedBackend(Backend backend) : previous_(active().backend) {
  select_backend(backend);
}

ScopedBackend::~ScopedBackend() { select_backend(previous_); }

}  // namespace trajstyle::numkit::kernels
