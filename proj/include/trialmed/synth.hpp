#pragma once

#include <cstddef>
#include <cstdint>

#include "trialmed/data.hpp"
#include "trialmed/dgp.hpp"

namespace trialmed {

/// n i.i.d. rows drawn node by node (C, A, M_1..M_K, Y) by inverse-CDF
/// Bernoulli draws. Row i depends only on (seed, i). Throws UsageError for n == 0.
Dataset generate(const Dgp& dgp, std::size_t n, std::uint64_t seed, std::size_t threads = 1);

/// Frozen K = 4, six-confounder model used for demos and golden tables.
Dgp default_dgp();

/// Frozen K = 2 model with one binary confounder and strongly dependent
/// mediators. No product term involves the confounder, so working models
/// with two-way exposure/mediator products contain the truth.
Dgp reference_k2_dgp();

}  // namespace trialmed
