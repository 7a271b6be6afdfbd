#include <cmath>

#include "trialmed/kernels.hpp"

namespace trialmed::kernels::scalar {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void multiply(const double* x, const double* z, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * z[i];
}

void exp(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
}

void logistic(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void bernoulli(const double* u, const double* p, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = u[i] < p[i] ? 1.0 : 0.0;
}

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

}  // namespace

const KernelTable kTable{axpy, multiply, exp, logistic, bernoulli, sum};

}  // namespace trialmed::kernels::scalar
