#pragma once

#include "stlpi/rng.hpp"
#include "stlpi/stl.hpp"

#include <vector>

namespace stlpi {

// Reference evaluators for cross-checking the signal-based implementation.
// Both recompute every subformula value on demand with plain recursion over
// the same grid-window convention.
double robustness_oracle(const Formula& f, const PredicateRegistry& reg,
                         const Trajectory& tr, int t_index);
bool boolean_oracle(const Formula& f, const PredicateRegistry& reg,
                    const Trajectory& tr, int t_index);

// Randomized case generation for the oracle-equivalence suite. Formulas use
// predicates p0..p{n_preds-1}, depth <= max_depth, and interval offsets small
// enough that every window stays non-empty on a >= 18-sample trajectory when
// evaluated at index 0 with max_depth <= 4.
FormulaPtr random_formula(Rng& rng, int n_preds, int max_depth, double dt);

// Random-walk planar trajectory with the given number of samples.
Trajectory random_trajectory(Rng& rng, int n_samples, double dt);

// Registry of n_preds random ball predicates named p0..p{n-1}.
PredicateRegistry random_registry(Rng& rng, int n_preds);

} // namespace stlpi
