#pragma once

// Data-parallel arithmetic used by the fitter and the Monte Carlo simulator.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds,
// an AVX2 variant. The active variant is chosen once at runtime from the
// CPU's capabilities and can be overridden (tests pin each variant and check
// them against each other).

#include <cstddef>
#include <span>
#include <string_view>

namespace trialmed::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[i] = x[i] * z[i]
  void (*multiply)(const double* x, const double* z, double* out, std::size_t n);
  // out[i] = exp(x[i])
  void (*exp)(const double* x, double* out, std::size_t n);
  // out[i] = 1 / (1 + exp(-x[i]))
  void (*logistic)(const double* x, double* out, std::size_t n);
  // out[i] = u[i] < p[i] ? 1 : 0
  void (*bernoulli)(const double* u, const double* p, double* out, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
};

/// Best variant this CPU and build support.
Isa detected_isa() noexcept;
bool isa_supported(Isa isa) noexcept;

Isa active_isa() noexcept;
/// Throws UsageError when the variant is not available on this machine.
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa) noexcept;
/// Accepts "scalar", "avx2" and "auto".
Isa parse_isa(std::string_view name);

const KernelTable& table(Isa isa);
const KernelTable& active();

namespace scalar {
extern const KernelTable kTable;
}
#if defined(TRIALMED_HAVE_AVX2)
namespace avx2 {
extern const KernelTable kTable;
}
#endif

// Span wrappers over the active table. Sizes must agree.
void axpy(double a, std::span<const double> x, std::span<double> y);
void multiply(std::span<const double> x, std::span<const double> z, std::span<double> out);
void exp(std::span<const double> x, std::span<double> out);
void logistic(std::span<const double> x, std::span<double> out);
void bernoulli(std::span<const double> u, std::span<const double> p, std::span<double> out);
double sum(std::span<const double> x);

}  // namespace trialmed::kernels
