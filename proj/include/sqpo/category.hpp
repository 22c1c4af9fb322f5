#pragma once

#include <optional>

#include "sqpo/graph.hpp"

namespace sqpo {

/// B <-left- A -right-> C
struct Span {
    Homomorphism left;
    Homomorphism right;
};

/// B -left-> D <-right- C
struct Cospan {
    Homomorphism left;
    Homomorphism right;
};

/// A -top-> B
/// |        |
/// left     right
/// v        v
/// C -bottom-> D
struct Square {
    Homomorphism top;
    Homomorphism left;
    Homomorphism right;
    Homomorphism bottom;
};

struct Pushout {
    Span span;
    Cospan cospan;
    const Graph& apex() const { return cospan.left.target(); }
    const GraphPtr& apex_ptr() const { return cospan.left.target_ptr(); }
};

struct Pullback {
    Cospan cospan;
    Span span;
    const Graph& apex() const { return span.left.source(); }
    const GraphPtr& apex_ptr() const { return span.left.source_ptr(); }
};

/// Completion of P -r-> L -m-> G into a pullback square
/// P -m_minus-> G⁻ -g_minus-> G.
struct PullbackComplement {
    Homomorphism r;
    Homomorphism m;
    Homomorphism m_minus;
    Homomorphism g_minus;
    const Graph& apex() const { return m_minus.target(); }
    const GraphPtr& apex_ptr() const { return m_minus.target_ptr(); }
};

/// Quotient of B ⊔ C by left(a) ~ right(a). Attributes are united per class.
/// Naming: a class named by `hints` (keyed by C-node id) takes that name;
/// otherwise a class with B members takes their sorted ids joined by `_`,
/// and a class of a single C node keeps its id. Clashes get `#k` suffixes.
Pushout pushout(const Span& s, const NodeMap& hints = {});

/// Pairs (b, c) with left(b) = right(c), named `b&c`; attributes intersect.
Pullback pullback(const Cospan& c);

/// Final pullback complement of r: P→L and mono m: L↣G. Unmatched nodes
/// keep their ids, a node with one preimage in P keeps its G id, k clones
/// of n become n_c1..n_ck in P-id order.
PullbackComplement final_pbc(const Homomorphism& r, const Homomorphism& m);

/// Unique arrow from the pushout apex into the cocone target.
Homomorphism po_mediator(const Pushout& po, const Cospan& cocone);

/// Unique arrow from the cone apex into the pullback apex.
Homomorphism pb_mediator(const Pullback& pb, const Span& cone);

/// Unique u: X→G⁻ with u∘x = m_minus and g_minus∘u = y, for a square
/// m∘r = y∘x that is a pullback. Throws MediatorIllDefined otherwise.
Homomorphism complement_mediator(const PullbackComplement& fp, const Homomorphism& x,
                                 const Homomorphism& y);

bool is_pushout(const Square& sq);
bool is_pullback(const Square& sq);
/// Square (r, m_minus, m, g_minus): a pullback that is final among the
/// pullback complements of r and m. Requires a mono right side.
bool is_final_pbc(const Square& sq);

struct ImageFactorization {
    Homomorphism epi;
    Homomorphism mono;
};

/// f = mono ∘ epi through the image of f (image ids are target ids).
ImageFactorization image_factorization(const Homomorphism& f);

Graph empty_graph();
Homomorphism initial_arrow(const GraphPtr& g);

/// Unique u: X→Y with n∘u = f for a mono n: Y↣G. Throws MediatorIllDefined
/// when f leaves the image of n or u is not a homomorphism.
Homomorphism factor_through(const Homomorphism& f, const Homomorphism& n);

/// Corestriction: f with its target replaced by `target` (ids must exist).
Homomorphism retarget(const Homomorphism& f, const GraphPtr& target);

}  // namespace sqpo
