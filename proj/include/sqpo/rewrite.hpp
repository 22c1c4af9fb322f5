#pragma once

#include <map>

#include "sqpo/category.hpp"

namespace sqpo {

/// Span L <-r_minus- P -r_plus-> R.
struct Rule {
    Homomorphism r_minus;
    Homomorphism r_plus;

    const Graph& lhs() const { return r_minus.target(); }
    const Graph& p() const { return r_minus.source(); }
    const Graph& rhs() const { return r_plus.target(); }
    const GraphPtr& lhs_ptr() const { return r_minus.target_ptr(); }
    const GraphPtr& p_ptr() const { return r_minus.source_ptr(); }
    const GraphPtr& rhs_ptr() const { return r_plus.target_ptr(); }

    friend bool operator==(const Rule& a, const Rule& b) {
        return a.r_minus == b.r_minus && a.r_plus == b.r_plus;
    }
};

enum class NodeRole { Preserved, Cloned, Deleted, Merged, Added };

struct RuleClassification {
    std::map<NodeId, NodeRole> lhs;
    std::map<NodeId, NodeRole> rhs;
};

Rule make_rule(const Homomorphism& r_minus, const Homomorphism& r_plus);
Rule make_rule(const Graph& L, const Graph& P, const Graph& R, const NodeMap& p_lhs,
               const NodeMap& p_rhs);
RuleClassification classify(const Rule& r);

Rule reverse_rule(const Rule& r);
Rule identity_rule(const GraphPtr& g);
Rule empty_rule();

/// True when no node or attribute is removed, cloned, merged or added.
bool is_identity_rule(const Rule& r);

struct RewriteRecord {
    Rule rule;
    Homomorphism m;              // L ↣ G
    Homomorphism m_minus;        // P ↣ G⁻
    Homomorphism m_plus;         // R ↣ G⁺
    Homomorphism g_arrow_minus;  // G⁻ → G
    Homomorphism g_arrow_plus;   // G⁻ → G⁺

    const Graph& g() const { return m.target(); }
    const Graph& g_minus() const { return m_minus.target(); }
    const Graph& g_plus() const { return m_plus.target(); }
    const GraphPtr& g_ptr() const { return m.target_ptr(); }
    const GraphPtr& g_minus_ptr() const { return m_minus.target_ptr(); }
    const GraphPtr& g_plus_ptr() const { return m_plus.target_ptr(); }
};

/// SqPO application: final pullback complement then pushout. `rhs_names`
/// optionally fixes the ids of result nodes that have an R-node preimage.
RewriteRecord apply_rule(const GraphPtr& g, const Rule& r, const Homomorphism& m,
                         const NodeMap& rhs_names = {});

bool is_reversible(const RewriteRecord& rec);

/// Applies the reverse rule at m_plus and restores the ids of rec.g.
RewriteRecord revert(const RewriteRecord& rec);

struct Overlap {
    Homomorphism x;  // D ↣ R1
    Homomorphism y;  // D ↣ L2
    const Graph& apex() const { return x.source(); }
    const GraphPtr& apex_ptr() const { return x.source_ptr(); }
};

Overlap compute_overlap(const RewriteRecord& rec1, const Homomorphism& m2);

bool is_sequentially_independent(const Overlap& o, const Rule& r1);

struct CompositionTrace {
    GraphPtr H;
    Homomorphism m_H;        // H ↣ G2
    Homomorphism r1_H;       // R1 ↣ H
    Homomorphism l2_H;       // L2 ↣ H
    Homomorphism p1_H;       // P1 ↣ P1_H
    Homomorphism p2_H;       // P2 ↣ P2_H
    Homomorphism h1_plus;    // P1_H → H
    Homomorphism h2_minus;   // P2_H → H
    Homomorphism m1_H;       // P1_H ↣ G1⁻
    Homomorphism m2_H;       // P2_H ↣ G2⁻
    Homomorphism l1_H;       // L1 → L
    Homomorphism h1_minus;   // P1_H → L
    Homomorphism r2_H;       // R2 → R
    Homomorphism h2_plus;    // P2_H → R
    Homomorphism p_prime;    // P → P1_H
    Homomorphism p_dblprime; // P → P2_H
    Rule composed;
    Homomorphism m;          // L ↣ G1
    Homomorphism m_plus;     // R ↣ G3

    const GraphPtr& P1_H() const { return p1_H.target_ptr(); }
    const GraphPtr& P2_H() const { return p2_H.target_ptr(); }
    const GraphPtr& L() const { return composed.lhs_ptr(); }
    const GraphPtr& P() const { return composed.p_ptr(); }
    const GraphPtr& R() const { return composed.rhs_ptr(); }
};

/// Composition of two consecutive rewrites along their overlap. Requires
/// rec1 to be reversible.
///
/// With `full_context` the union H of R1 and L2 is widened to the full
/// subgraph of G2 on its nodes (G2's edges and attributes between them).
/// Without it H is the bare pushout; in simple graphs that version loses
/// edges and attribute values that a clone made by r1 shares with G2 but
/// that neither R1 nor L2 mentions.
CompositionTrace compose_rules(const RewriteRecord& rec1, const Overlap& o,
                               const RewriteRecord& rec2, bool full_context = true);

/// Graph with nodes renamed by a bijection (ids absent from `names` are
/// kept), together with the isomorphism g → renamed.
Homomorphism relabel(const GraphPtr& g, const NodeMap& names);

/// Rule with the three graphs renamed; maps default to identity.
Rule rename_rule(const Rule& r, const NodeMap& lhs_names, const NodeMap& p_names,
                 const NodeMap& rhs_names);

}  // namespace sqpo
