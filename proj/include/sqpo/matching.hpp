#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sqpo/graph.hpp"

namespace sqpo {

/// All injective homomorphisms pattern ↣ host, sorted lexicographically by
/// the tuple of images taken in pattern-node id order.
std::vector<Homomorphism> find_monomorphisms(const GraphPtr& pattern, const GraphPtr& host);

/// The first element of find_monomorphisms without enumerating the rest.
std::optional<Homomorphism> first_monomorphism(const GraphPtr& pattern, const GraphPtr& host);

/// Number of monomorphisms, counting stops at `cap`.
std::size_t count_monomorphisms(const GraphPtr& pattern, const GraphPtr& host, std::size_t cap);

/// An isomorphism g1 → g2 (attribute sets equal, not merely included), the
/// first one in monomorphism order.
std::optional<Homomorphism> find_isomorphism(const GraphPtr& g1, const GraphPtr& g2);

bool isomorphic(const GraphPtr& g1, const GraphPtr& g2);

}  // namespace sqpo
