#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sqpo/rewrite.hpp"

namespace sqpo {

using Vertex = std::string;
using SkeletonEdge = std::pair<Vertex, Vertex>;

struct Skeleton {
    std::set<Vertex> nodes;
    std::set<SkeletonEdge> edges;

    std::vector<Vertex> successors(const Vertex& v) const;
    std::vector<Vertex> predecessors(const Vertex& v) const;
    /// Vertices in a topological order; throws CycleDetected.
    std::vector<Vertex> topological_order() const;
    /// Vertices with a nonempty path to / from v.
    std::set<Vertex> ancestors(const Vertex& v) const;
    std::set<Vertex> descendants(const Vertex& v) const;

    friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

void validate_skeleton(const Skeleton& s);

struct Hierarchy {
    Skeleton skeleton;
    std::map<Vertex, GraphPtr> graphs;
    std::map<SkeletonEdge, Homomorphism> homs;

    const Graph& graph(const Vertex& v) const { return *graphs.at(v); }
    const Homomorphism& hom(const Vertex& s, const Vertex& t) const { return homs.at({s, t}); }
    /// Composite arrow along some path from s to t (identity for s = t).
    Homomorphism path_hom(const Vertex& s, const Vertex& t) const;

    friend bool operator==(const Hierarchy& a, const Hierarchy& b);
};

Hierarchy make_hierarchy(const Skeleton& skeleton, const std::map<Vertex, GraphPtr>& graphs,
                         const std::map<SkeletonEdge, NodeMap>& typing);
/// Validates an already assembled hierarchy (arrows, acyclicity, paths).
void validate_hierarchy(const Hierarchy& h);

struct RuleHomomorphism {
    Homomorphism lambda;
    Homomorphism pi;
    Homomorphism rho;

    friend bool operator==(const RuleHomomorphism& a, const RuleHomomorphism& b) {
        return a.lambda == b.lambda && a.pi == b.pi && a.rho == b.rho;
    }
};

RuleHomomorphism compose(const RuleHomomorphism& f, const RuleHomomorphism& g);

struct RuleHierarchy {
    Skeleton skeleton;
    std::map<Vertex, Rule> rules;
    std::map<SkeletonEdge, RuleHomomorphism> homs;

    const Rule& rule(const Vertex& v) const { return rules.at(v); }

    friend bool operator==(const RuleHierarchy& a, const RuleHierarchy& b) {
        return a.skeleton == b.skeleton && a.rules == b.rules && a.homs == b.homs;
    }
};

/// Throws RuleHomViolation naming the edge and the failing square.
RuleHierarchy make_rule_hierarchy(const Skeleton& skeleton, const std::map<Vertex, Rule>& rules,
                                  const std::map<SkeletonEdge, RuleHomomorphism>& homs);

/// Identity rules on the empty graph at every vertex.
RuleHierarchy empty_rule_hierarchy(const Skeleton& skeleton);

using InstanceAssignment = std::map<Vertex, Homomorphism>;
/// Per-vertex naming hints for result nodes, see apply_rule.
using NameAssignment = std::map<Vertex, NodeMap>;

struct Applicability {
    bool applicable = false;
    std::vector<std::string> failures;
    std::map<SkeletonEdge, Homomorphism> homs_minus;
};

Applicability check_applicability(const Hierarchy& h, const RuleHierarchy& r,
                                  const InstanceAssignment& i);

struct HierarchyRewriteRecord {
    Hierarchy source;
    RuleHierarchy rules;
    std::map<Vertex, RewriteRecord> records;
    std::map<SkeletonEdge, Homomorphism> homs_minus;
    std::map<SkeletonEdge, Homomorphism> homs_plus;
    Hierarchy result;

    InstanceAssignment instances() const;
    InstanceAssignment rhs_instances() const;
};

/// Throws NotApplicable with the diagnostic.
HierarchyRewriteRecord apply_rule_hierarchy(const Hierarchy& h, const RuleHierarchy& r,
                                            const InstanceAssignment& i,
                                            const NameAssignment& rhs_names = {});

RuleHierarchy reverse_rule_hierarchy(const RuleHierarchy& r);

bool is_hierarchy_rewrite_reversible(const HierarchyRewriteRecord& rec);

/// Applies the reversed rule hierarchy at the rhs instances, restoring the
/// original ids. Throws NotReversible.
HierarchyRewriteRecord revert_hierarchy(const HierarchyRewriteRecord& rec);

struct LiftingResult {
    Rule rule;
    Homomorphism instance;        // L_H ↣ H
    RuleHomomorphism hom_to_origin;
    // Pullback data reused when connecting liftings.
    Pullback h_minus;             // H⁻ with legs to H and G⁻
    Homomorphism p_to_h_minus;    // P_H → H⁻
};

/// Backward propagation of rec's restrictive phase along h: H → G.
LiftingResult lifting_rule(const Homomorphism& h, const RewriteRecord& rec);

struct ProjectionResult {
    Rule rule;
    Homomorphism instance;        // P_T ↣ T
    RuleHomomorphism hom_from_origin;
    Pushout t_plus;               // T⁺ with legs from T and G⁺
    Homomorphism rhs_inclusion;   // R_T ↣ T⁺
};

/// Forward propagation of rec's expansive phase along h: G → T.
ProjectionResult projection_rule(const Homomorphism& h, const RewriteRecord& rec);

struct InducedRuleHierarchy {
    RuleHierarchy rules;
    InstanceAssignment instances;
};

/// Rule hierarchy for rewriting `origin` with r at m, with canonical
/// propagation to ancestors and descendants and identity rules elsewhere.
InducedRuleHierarchy induced_rule_hierarchy(const Hierarchy& h, const Vertex& origin,
                                            const Rule& r, const Homomorphism& m);

struct HierarchyOverlap {
    std::map<Vertex, Overlap> overlaps;
    std::map<SkeletonEdge, Homomorphism> homs;
};

HierarchyOverlap hierarchy_overlap(const HierarchyRewriteRecord& rec1, const InstanceAssignment& i2);

struct HierarchyComposition {
    RuleHierarchy rules;
    InstanceAssignment instances;      // L_v ↣ G1_v
    InstanceAssignment rhs_instances;  // R_v ↣ G3_v
    std::map<Vertex, CompositionTrace> traces;
};

HierarchyComposition compose_rule_hierarchies(const HierarchyRewriteRecord& rec1,
                                              const HierarchyOverlap& o,
                                              const HierarchyRewriteRecord& rec2);

/// Subgraph of the common target covered by the images of `arrows`
/// (attributes united), with its inclusion.
Homomorphism image_union(const std::vector<Homomorphism>& arrows, const GraphPtr& target);

}  // namespace sqpo
