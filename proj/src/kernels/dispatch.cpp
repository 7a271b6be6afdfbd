#include <atomic>
#include <cassert>

#include "trialmed/errors.hpp"
#include "trialmed/kernels.hpp"

namespace trialmed::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(TRIALMED_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{detected_isa()};
  return slot;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return cpu_has_avx2();
  }
  return false;
}

Isa detected_isa() noexcept { return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

Isa active_isa() noexcept { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw UsageError("kernel variant '" + std::string(isa_name(isa)) +
                     "' is not supported on this machine");
  }
  active_slot().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  if (name == "auto") return detected_isa();
  throw UsageError("unknown kernel variant '" + std::string(name) + "' (expected scalar|avx2|auto)");
}

const KernelTable& table(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return scalar::kTable;
    case Isa::kAvx2:
#if defined(TRIALMED_HAVE_AVX2)
      if (cpu_has_avx2()) return avx2::kTable;
#endif
      break;
  }
  throw UsageError("kernel variant '" + std::string(isa_name(isa)) + "' is not available");
}

const KernelTable& active() { return table(active_isa()); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(a, x.data(), y.data(), y.size());
}

void multiply(std::span<const double> x, std::span<const double> z, std::span<double> out) {
  assert(x.size() == out.size() && z.size() == out.size());
  active().multiply(x.data(), z.data(), out.data(), out.size());
}

void exp(std::span<const double> x, std::span<double> out) {
  assert(x.size() == out.size());
  active().exp(x.data(), out.data(), out.size());
}

void logistic(std::span<const double> x, std::span<double> out) {
  assert(x.size() == out.size());
  active().logistic(x.data(), out.data(), out.size());
}

void bernoulli(std::span<const double> u, std::span<const double> p, std::span<double> out) {
  assert(u.size() == out.size() && p.size() == out.size());
  active().bernoulli(u.data(), p.data(), out.data(), out.size());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

}  // namespace trialmed::kernels
