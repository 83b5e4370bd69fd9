#pragma once
// Small floating-point lattice toolbox over GMP mpf: Gram-Schmidt based LLL
// reduction and Fincke-Pohst enumeration of short vectors.  Dimensions here
// are tiny (the field degree), but entries span hundreds of orders of
// magnitude once embeddings are skewed, hence arbitrary-precision floats.
// Callers choose the working precision via mpf_set_default_prec.

#include <cstdint>
#include <functional>
#include <vector>

#include <gmpxx.h>

#include "hasse/linalg.hpp"

namespace hasse {

using VecF = std::vector<mpf_class>;
using MatF = std::vector<VecF>;  // one row per lattice basis vector

// In-place LLL (Lovasz constant 0.99) on the rows of `basis` (m >= n
// coordinates each).  If transform != null it receives the unimodular U
// with rows_out = U * rows_in.
void lll_reduce(MatF& basis, MatZ* transform = nullptr);

// Enumerate all nonzero integer combinations x of the rows with
// ||x||^2 <= radius2, up to sign (one representative of {x, -x} is
// reported).  `yield` receives the integer coefficients w.r.t. the given
// rows.  Returns false when node_budget was exhausted before the tree was
// complete (everything reported so far is still valid).
bool enumerate_short_vectors(
    const MatF& basis, const mpf_class& radius2, std::uint64_t node_budget,
    const std::function<void(const std::vector<long>&)>& yield);

}  // namespace hasse
