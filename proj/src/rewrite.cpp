#include "sqpo/rewrite.hpp"

#include "sqpo/error.hpp"

namespace sqpo {
namespace {

// Full subgraph of the target on the image of a mono, carrying the target's
// edges and attributes, with the corestriction of the mono onto it.
Homomorphism full_context_of(const Homomorphism& mono) {
    const Graph& G = mono.target();
    Graph F;
    NodeMap rename;
    for (const auto& [q, n] : mono.node_map()) {
        F.nodes.emplace(q, G.node_attrs(n));
        rename.emplace(n, q);
    }
    for (const auto& [key, attrs] : G.edges) {
        auto a = rename.find(key.first);
        auto b = rename.find(key.second);
        if (a != rename.end() && b != rename.end()) F.edges.emplace(EdgeKey{a->second, b->second}, attrs);
    }
    NodeMap id;
    for (const auto& [q, _] : F.nodes) id.emplace(q, q);
    return Homomorphism(mono.source_ptr(), share(std::move(F)), std::move(id));
}

}  // namespace

Rule make_rule(const Homomorphism& r_minus, const Homomorphism& r_plus) {
    if (!same_graph(r_minus.source_ptr(), r_plus.source_ptr()))
        fail(ErrorCode::InvalidRule, "r_minus and r_plus have different sources");
    for (const auto* leg : {&r_minus, &r_plus}) {
        HomAnalysis a = analyze_homomorphism(*leg);
        if (!a.valid)
            fail(ErrorCode::InvalidRule,
                 std::string(leg == &r_minus ? "r_minus" : "r_plus") + ": " + a.problems.front());
    }
    for (const auto* g : {&r_minus.source(), &r_minus.target(), &r_plus.target()}) {
        auto problems = validate_graph(*g);
        if (!problems.empty()) fail(ErrorCode::InvalidRule, problems.front());
    }
    return Rule{r_minus, r_plus};
}

Rule make_rule(const Graph& L, const Graph& P, const Graph& R, const NodeMap& p_lhs,
               const NodeMap& p_rhs) {
    GraphPtr p = share(P);
    return make_rule(Homomorphism(p, share(L), p_lhs), Homomorphism(p, share(R), p_rhs));
}

RuleClassification classify(const Rule& r) {
    RuleClassification out;
    std::map<NodeId, int> lhs_pre, rhs_pre;
    for (const auto& [_, l] : r.r_minus.node_map()) ++lhs_pre[l];
    for (const auto& [_, x] : r.r_plus.node_map()) ++rhs_pre[x];
    for (const auto& [l, _] : r.lhs().nodes) {
        int k = lhs_pre[l];
        out.lhs[l] = k == 0 ? NodeRole::Deleted : k == 1 ? NodeRole::Preserved : NodeRole::Cloned;
    }
    for (const auto& [x, _] : r.rhs().nodes) {
        int k = rhs_pre[x];
        out.rhs[x] = k == 0 ? NodeRole::Added : k == 1 ? NodeRole::Preserved : NodeRole::Merged;
    }
    return out;
}

Rule reverse_rule(const Rule& r) { return Rule{r.r_plus, r.r_minus}; }

Rule identity_rule(const GraphPtr& g) {
    Homomorphism id = Homomorphism::identity(g);
    return Rule{id, id};
}

Rule empty_rule() { return identity_rule(share(empty_graph())); }

bool is_identity_rule(const Rule& r) {
    return analyze_homomorphism(r.r_minus).iso && analyze_homomorphism(r.r_plus).iso;
}

RewriteRecord apply_rule(const GraphPtr& g, const Rule& r, const Homomorphism& m,
                         const NodeMap& rhs_names) {
    if (!same_graph(m.source_ptr(), r.lhs_ptr()))
        fail(ErrorCode::InstanceMismatch, "instance source is not the rule's left-hand side");
    if (!same_graph(m.target_ptr(), g))
        fail(ErrorCode::InstanceMismatch, "instance target is not the rewritten graph");
    HomAnalysis a = analyze_homomorphism(m);
    if (!a.valid) fail(ErrorCode::InstanceMismatch, "instance: " + a.problems.front());
    if (!a.mono) fail(ErrorCode::NotMono, "instance is not injective");

    PullbackComplement fp = final_pbc(r.r_minus, m);
    Pushout po = pushout(Span{fp.m_minus, r.r_plus}, rhs_names);
    return RewriteRecord{r, m, fp.m_minus, po.cospan.right, fp.g_minus, po.cospan.left};
}

bool is_reversible(const RewriteRecord& rec) {
    Square a{rec.rule.r_minus, rec.m_minus, rec.m, rec.g_arrow_minus};
    Square b{rec.rule.r_plus, rec.m_minus, rec.m_plus, rec.g_arrow_plus};
    return is_pushout(a) && is_final_pbc(b);
}

RewriteRecord revert(const RewriteRecord& rec) {
    if (!is_reversible(rec)) fail(ErrorCode::NotReversible, "rewrite is not reversible");
    return apply_rule(rec.g_plus_ptr(), reverse_rule(rec.rule), rec.m_plus, rec.m.node_map());
}

Overlap compute_overlap(const RewriteRecord& rec1, const Homomorphism& m2) {
    if (!same_graph(m2.target_ptr(), rec1.g_plus_ptr()))
        fail(ErrorCode::DomainMismatch, "second instance does not target the first result");
    require_valid(m2, "second instance");
    if (!is_mono(m2)) fail(ErrorCode::NotMono, "second instance is not injective");
    Pullback pb = pullback(Cospan{rec1.m_plus, m2});
    return Overlap{pb.span.left, pb.span.right};
}

bool is_sequentially_independent(const Overlap& o, const Rule& r1) {
    Pullback pb = pullback(Cospan{o.x, r1.r_plus});
    return analyze_homomorphism(pb.span.left).iso;
}

CompositionTrace compose_rules(const RewriteRecord& rec1, const Overlap& o,
                               const RewriteRecord& rec2, bool full_context) {
    if (!same_graph(rec2.g_ptr(), rec1.g_plus_ptr()))
        fail(ErrorCode::DomainMismatch, "second rewrite does not start at the first result");
    if (!same_graph(o.x.target_ptr(), rec1.rule.rhs_ptr()) ||
        !same_graph(o.y.target_ptr(), rec2.rule.lhs_ptr()))
        fail(ErrorCode::DomainMismatch, "overlap does not connect R1 and L2");
    if (!is_reversible(rec1)) fail(ErrorCode::NotReversible, "first rewrite is not reversible");

    const Rule& r1 = rec1.rule;
    const Rule& r2 = rec2.rule;

    Pushout h = pushout(Span{o.x, o.y});
    Homomorphism r1_H = h.cospan.left;
    Homomorphism l2_H = h.cospan.right;
    Homomorphism m_H = po_mediator(h, Cospan{rec1.m_plus, rec2.m});
    GraphPtr H = h.apex_ptr();
    if (full_context) {
        Homomorphism widen = full_context_of(m_H);
        r1_H = compose(r1_H, widen);
        l2_H = compose(l2_H, widen);
        H = widen.target_ptr();
        NodeMap back;
        for (const auto& [q, n] : m_H.node_map()) back.emplace(widen(q), n);
        m_H = Homomorphism(H, m_H.target_ptr(), std::move(back));
    }

    PullbackComplement fp1 = final_pbc(r1.r_plus, r1_H);
    PullbackComplement fp2 = final_pbc(r2.r_minus, l2_H);

    auto mediate = [](const PullbackComplement& fp, const Homomorphism& x, const Homomorphism& y) {
        try {
            return complement_mediator(fp, x, y);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::MediatorIllDefined)
                fail(ErrorCode::NotReversible, std::string("no instance of the complement: ") + e.what());
            throw;
        }
    };
    PullbackComplement g1{r1.r_plus, rec1.m_plus, rec1.m_minus, rec1.g_arrow_plus};
    Homomorphism m1_H = mediate(g1, fp1.m_minus, compose(fp1.g_minus, m_H));
    PullbackComplement g2{r2.r_minus, rec2.m, rec2.m_minus, rec2.g_arrow_minus};
    Homomorphism m2_H = mediate(g2, fp2.m_minus, compose(fp2.g_minus, m_H));

    Pushout lpo = pushout(Span{r1.r_minus, fp1.m_minus});
    Homomorphism m = po_mediator(lpo, Cospan{rec1.m, compose(m1_H, rec1.g_arrow_minus)});
    Pushout rpo = pushout(Span{r2.r_plus, fp2.m_minus});
    Homomorphism m_plus = po_mediator(rpo, Cospan{rec2.m_plus, compose(m2_H, rec2.g_arrow_plus)});

    Pullback p = pullback(Cospan{fp1.g_minus, fp2.g_minus});
    Rule composed{compose(p.span.left, lpo.cospan.right), compose(p.span.right, rpo.cospan.right)};

    return CompositionTrace{H,      m_H,
                            r1_H,              l2_H,
                            fp1.m_minus,       fp2.m_minus,
                            fp1.g_minus,       fp2.g_minus,
                            m1_H,              m2_H,
                            lpo.cospan.left,   lpo.cospan.right,
                            rpo.cospan.left,   rpo.cospan.right,
                            p.span.left,       p.span.right,
                            composed,          m,
                            m_plus};
}

Homomorphism relabel(const GraphPtr& g, const NodeMap& names) {
    NodeMap full;
    std::set<NodeId> used;
    for (const auto& [id, _] : g->nodes) {
        auto it = names.find(id);
        const NodeId& to = it == names.end() ? id : it->second;
        if (!used.insert(to).second) fail(ErrorCode::DomainMismatch, "relabel: duplicate id " + to);
        full.emplace(id, to);
    }
    Graph out;
    for (const auto& [id, attrs] : g->nodes) out.nodes.emplace(full.at(id), attrs);
    for (const auto& [key, attrs] : g->edges)
        out.edges.emplace(EdgeKey{full.at(key.first), full.at(key.second)}, attrs);
    return Homomorphism(g, share(std::move(out)), std::move(full));
}

Rule rename_rule(const Rule& r, const NodeMap& lhs_names, const NodeMap& p_names,
                 const NodeMap& rhs_names) {
    Homomorphism iso_l = relabel(r.lhs_ptr(), lhs_names);
    Homomorphism iso_p = relabel(r.p_ptr(), p_names);
    Homomorphism iso_r = relabel(r.rhs_ptr(), rhs_names);
    Homomorphism back_p = inverse(iso_p);
    return Rule{compose(compose(back_p, r.r_minus), iso_l), compose(compose(back_p, r.r_plus), iso_r)};
}

}  // namespace sqpo
