#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "valence/model.hpp"

namespace valence {

/// A set of mutually non-dominated value vectors, lexicographically
/// descending.
using ParetoSet = std::vector<ValueVector>;

/// v >= w component-wise and v != w.
bool dominates(const ValueVector& v, const ValueVector& w);

/// v >= w - tol component-wise.
bool weakly_dominates(const ValueVector& v, const ValueVector& w, double tol = 0.0);

/// Strict lexicographic "greater than", used for every tie-break.
bool lex_greater(const ValueVector& a, const ValueVector& b);

double linf_distance(const ValueVector& a, const ValueVector& b);

/// Non-dominated subset of `vectors`. A vector within `tol` (per component)
/// of being dominated by a kept vector is dropped, so near-duplicates
/// collapse onto the lexicographically largest. Output is lexicographically
/// descending. Mixed dimensions throw ContractViolation.
ParetoSet pareto_prune(std::span<const ValueVector> vectors, double tol = 0.0);

/// Same selection as pareto_prune, returning indices into `vectors` in the
/// output order.
std::vector<std::size_t> pareto_prune_indices(std::span<const ValueVector> vectors, double tol = 0.0);

/// Hausdorff distance under L-infinity. Empty against empty is 0; empty
/// against non-empty is infinity.
double hausdorff_distance(std::span<const ValueVector> a, std::span<const ValueVector> b);

/// Measure of the union of boxes [reference, v]. The reference must be
/// component-wise <= every member (ContractViolation otherwise).
double hypervolume(std::span<const ValueVector> front, const ValueVector& reference);

/// Keeps the `limit` members with the largest exclusive hypervolume
/// contribution, removing the smallest contributor one at a time. Ties
/// remove the lexicographically smallest. Returns kept indices in input
/// order.
std::vector<std::size_t> hypervolume_cap(std::span<const ValueVector> front, std::size_t limit);

/// Component-wise minimum over all vectors, minus `margin`.
ValueVector reference_below(std::span<const ValueVector> vectors, double margin = 1.0);

}  // namespace valence
