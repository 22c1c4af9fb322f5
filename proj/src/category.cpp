#include "sqpo/category.hpp"

#include <algorithm>
#include <numeric>

#include "sqpo/error.hpp"

namespace sqpo {
namespace {

class NameAllocator {
public:
    NodeId claim(const NodeId& wanted) {
        if (used_.insert(wanted).second) return wanted;
        for (int k = 1;; ++k) {
            NodeId candidate = wanted + "#" + std::to_string(k);
            if (used_.insert(candidate).second) return candidate;
        }
    }

private:
    std::set<NodeId> used_;
};

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

bool commutes(const Homomorphism& a1, const Homomorphism& a2, const Homomorphism& b1,
              const Homomorphism& b2) {
    // a2 ∘ a1 = b2 ∘ b1 pointwise
    for (const auto& [x, y] : a1.node_map()) {
        auto i = a2.node_map().find(y);
        auto j = b1.node_map().find(x);
        if (i == a2.node_map().end() || j == b1.node_map().end()) return false;
        auto k = b2.node_map().find(j->second);
        if (k == b2.node_map().end() || i->second != k->second) return false;
    }
    return true;
}

void require_arrow(const Homomorphism& h, ErrorCode code, const std::string& what) {
    HomAnalysis a = analyze_homomorphism(h);
    if (!a.valid) fail(code, what + ": " + a.problems.front());
}

bool square_commutes(const Square& sq) {
    return same_graph(sq.top.source_ptr(), sq.left.source_ptr()) &&
           same_graph(sq.top.target_ptr(), sq.right.source_ptr()) &&
           same_graph(sq.left.target_ptr(), sq.bottom.source_ptr()) &&
           same_graph(sq.right.target_ptr(), sq.bottom.target_ptr()) &&
           commutes(sq.top, sq.right, sq.left, sq.bottom);
}

}  // namespace

Pushout pushout(const Span& s, const NodeMap& hints) {
    if (!same_graph(s.left.source_ptr(), s.right.source_ptr()))
        fail(ErrorCode::InvalidSpan, "span legs have different sources");
    require_arrow(s.left, ErrorCode::InvalidSpan, "left leg");
    require_arrow(s.right, ErrorCode::InvalidSpan, "right leg");

    const Graph& B = s.left.target();
    const Graph& C = s.right.target();
    std::vector<const NodeId*> ids;
    std::map<NodeId, std::size_t> b_index, c_index;
    for (const auto& [id, _] : B.nodes) {
        b_index.emplace(id, ids.size());
        ids.push_back(&id);
    }
    const std::size_t nb = ids.size();
    for (const auto& [id, _] : C.nodes) {
        c_index.emplace(id, ids.size());
        ids.push_back(&id);
    }
    UnionFind uf(ids.size());
    for (const auto& [a, _] : s.left.source().nodes)
        uf.unite(b_index.at(s.left(a)), c_index.at(s.right(a)));

    std::map<std::size_t, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < ids.size(); ++i) classes[uf.find(i)].push_back(i);

    struct Plan {
        int group;
        NodeId wanted;
        std::size_t root;
    };
    std::vector<Plan> plans;
    for (const auto& [root, members] : classes) {
        std::vector<NodeId> b_ids;
        std::optional<NodeId> hint;
        NodeId c_id;
        for (std::size_t i : members) {
            if (i < nb) {
                b_ids.push_back(*ids[i]);
            } else {
                if (c_id.empty()) c_id = *ids[i];
                auto h = hints.find(*ids[i]);
                if (h != hints.end() && (!hint || h->second < *hint)) hint = h->second;
            }
        }
        if (hint) {
            plans.push_back({0, *hint, root});
        } else if (b_ids.size() == 1) {
            plans.push_back({1, b_ids.front(), root});
        } else if (!b_ids.empty()) {
            std::string joined;
            for (const auto& b : b_ids) joined += (joined.empty() ? "" : "_") + b;
            plans.push_back({2, joined, root});
        } else {
            plans.push_back({3, c_id, root});
        }
    }
    std::stable_sort(plans.begin(), plans.end(), [](const Plan& a, const Plan& b) {
        return std::tie(a.group, a.wanted) < std::tie(b.group, b.wanted);
    });

    NameAllocator names;
    std::map<std::size_t, NodeId> class_name;
    for (const auto& p : plans) class_name.emplace(p.root, names.claim(p.wanted));

    Graph Q;
    NodeMap to_b, to_c;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const NodeId& q = class_name.at(uf.find(i));
        const AttrSet& attrs = i < nb ? B.node_attrs(*ids[i]) : C.node_attrs(*ids[i]);
        Q.nodes[q] = unite(Q.nodes[q], attrs);
        (i < nb ? to_b : to_c).emplace(*ids[i], q);
    }
    for (const auto& [key, attrs] : B.edges) {
        EdgeKey e{to_b.at(key.first), to_b.at(key.second)};
        Q.edges[e] = unite(Q.edges[e], attrs);
    }
    for (const auto& [key, attrs] : C.edges) {
        EdgeKey e{to_c.at(key.first), to_c.at(key.second)};
        Q.edges[e] = unite(Q.edges[e], attrs);
    }
    GraphPtr q = share(std::move(Q));
    return Pushout{s, Cospan{Homomorphism(s.left.target_ptr(), q, std::move(to_b)),
                             Homomorphism(s.right.target_ptr(), q, std::move(to_c))}};
}

Pullback pullback(const Cospan& c) {
    if (!same_graph(c.left.target_ptr(), c.right.target_ptr()))
        fail(ErrorCode::InvalidCospan, "cospan legs have different targets");
    require_arrow(c.left, ErrorCode::InvalidCospan, "left leg");
    require_arrow(c.right, ErrorCode::InvalidCospan, "right leg");

    const Graph& B = c.left.source();
    const Graph& C = c.right.source();
    std::map<NodeId, std::vector<NodeId>> c_over;
    for (const auto& [y, d] : c.right.node_map()) c_over[d].push_back(y);

    Graph D;
    NodeMap to_b, to_c;
    NameAllocator names;
    for (const auto& [x, d] : c.left.node_map()) {
        auto it = c_over.find(d);
        if (it == c_over.end()) continue;
        for (const auto& y : it->second) {
            NodeId id = names.claim(x + "&" + y);
            D.nodes.emplace(id, intersect(B.node_attrs(x), C.node_attrs(y)));
            to_b.emplace(id, x);
            to_c.emplace(id, y);
        }
    }
    std::map<NodeId, std::vector<NodeId>> over_b;
    for (const auto& [d, b] : to_b) over_b[b].push_back(d);
    for (const auto& [key, b_attrs] : B.edges) {
        auto su = over_b.find(key.first);
        auto sv = over_b.find(key.second);
        if (su == over_b.end() || sv == over_b.end()) continue;
        for (const auto& u : su->second) {
            for (const auto& v : sv->second) {
                const NodeId& cu = to_c.at(u);
                const NodeId& cv = to_c.at(v);
                if (!C.has_edge(cu, cv)) continue;
                D.edges.emplace(EdgeKey{u, v}, intersect(b_attrs, C.edge_attrs(cu, cv)));
            }
        }
    }
    GraphPtr d = share(std::move(D));
    return Pullback{c, Span{Homomorphism(d, c.left.source_ptr(), std::move(to_b)),
                            Homomorphism(d, c.right.source_ptr(), std::move(to_c))}};
}

PullbackComplement final_pbc(const Homomorphism& r, const Homomorphism& m) {
    if (!same_graph(r.target_ptr(), m.source_ptr()))
        fail(ErrorCode::DomainMismatch, "final_pbc: r and m are not composable");
    require_valid(r, "final_pbc: r");
    require_valid(m, "final_pbc: m");
    if (!is_mono(m)) fail(ErrorCode::NotMono, "final_pbc: instance is not a mono");

    const Graph& P = r.source();
    const Graph& L = r.target();
    const Graph& G = m.target();

    std::map<NodeId, NodeId> matched;  // G node -> L node
    for (const auto& [l, n] : m.node_map()) matched.emplace(n, l);

    NameAllocator names;
    NodeMap p_name;      // P node -> G⁻ node
    NodeMap down;        // G⁻ node -> G node
    std::map<NodeId, NodeId> origin_p;  // G⁻ node -> P node, for P-nodes
    Graph Gm;

    for (const auto& [n, attrs] : G.nodes) {
        if (matched.contains(n)) continue;
        NodeId id = names.claim(n);
        Gm.nodes.emplace(id, attrs);
        down.emplace(id, n);
    }
    std::map<NodeId, std::vector<NodeId>> pre;  // L node -> sorted P preimages
    for (const auto& [p, l] : r.node_map()) pre[l].push_back(p);
    auto place = [&](const NodeId& p, const NodeId& wanted) {
        const NodeId& l = r(p);
        const NodeId& n = m(l);
        NodeId id = names.claim(wanted);
        Gm.nodes.emplace(id, subtract(G.node_attrs(n), subtract(L.node_attrs(l), P.node_attrs(p))));
        down.emplace(id, n);
        origin_p.emplace(id, p);
        p_name.emplace(p, id);
    };
    for (const auto& [l, ps] : pre)
        if (ps.size() == 1) place(ps.front(), m(l));
    for (const auto& [l, ps] : pre) {
        if (ps.size() < 2) continue;
        for (std::size_t k = 0; k < ps.size(); ++k)
            place(ps[k], m(l) + "_c" + std::to_string(k + 1));
    }

    std::map<NodeId, std::vector<NodeId>> over;  // G node -> G⁻ nodes
    for (const auto& [x, n] : down) over[n].push_back(x);
    for (const auto& [key, attrs] : G.edges) {
        auto su = over.find(key.first);
        auto sv = over.find(key.second);
        if (su == over.end() || sv == over.end()) continue;
        for (const auto& u : su->second) {
            for (const auto& v : sv->second) {
                auto pu = origin_p.find(u);
                auto pv = origin_p.find(v);
                AttrSet e = attrs;
                if (pu != origin_p.end() && pv != origin_p.end()) {
                    const NodeId& lu = r(pu->second);
                    const NodeId& lv = r(pv->second);
                    if (L.has_edge(lu, lv)) {
                        if (!P.has_edge(pu->second, pv->second)) continue;
                        e = subtract(attrs, subtract(L.edge_attrs(lu, lv),
                                                     P.edge_attrs(pu->second, pv->second)));
                    }
                }
                Gm.edges.emplace(EdgeKey{u, v}, std::move(e));
            }
        }
    }
    GraphPtr gm = share(std::move(Gm));
    return PullbackComplement{r, m, Homomorphism(r.source_ptr(), gm, std::move(p_name)),
                              Homomorphism(gm, m.target_ptr(), std::move(down))};
}

Homomorphism po_mediator(const Pushout& po, const Cospan& cocone) {
    if (!same_graph(cocone.left.source_ptr(), po.cospan.left.source_ptr()) ||
        !same_graph(cocone.right.source_ptr(), po.cospan.right.source_ptr()) ||
        !same_graph(cocone.left.target_ptr(), cocone.right.target_ptr()))
        fail(ErrorCode::MediatorIllDefined, "cocone does not match the pushout span");
    if (!commutes(po.span.left, cocone.left, po.span.right, cocone.right))
        fail(ErrorCode::MediatorIllDefined, "cocone does not commute with the span");
    NodeMap med;
    auto assign = [&](const Homomorphism& leg, const Homomorphism& target_leg) {
        for (const auto& [x, q] : leg.node_map()) {
            const NodeId& image = target_leg(x);
            auto [it, fresh] = med.emplace(q, image);
            if (!fresh && it->second != image)
                fail(ErrorCode::MediatorIllDefined,
                     "class " + q + " maps to both " + it->second + " and " + image);
        }
    };
    assign(po.cospan.left, cocone.left);
    assign(po.cospan.right, cocone.right);
    Homomorphism out(po.apex_ptr(), cocone.left.target_ptr(), std::move(med));
    require_arrow(out, ErrorCode::MediatorIllDefined, "pushout mediator");
    return out;
}

Homomorphism pb_mediator(const Pullback& pb, const Span& cone) {
    if (!same_graph(cone.left.source_ptr(), cone.right.source_ptr()) ||
        !same_graph(cone.left.target_ptr(), pb.cospan.left.source_ptr()) ||
        !same_graph(cone.right.target_ptr(), pb.cospan.right.source_ptr()))
        fail(ErrorCode::MediatorIllDefined, "cone does not match the pullback cospan");
    if (!commutes(cone.left, pb.cospan.left, cone.right, pb.cospan.right))
        fail(ErrorCode::MediatorIllDefined, "cone does not commute with the cospan");
    std::map<std::pair<NodeId, NodeId>, NodeId> by_pair;
    for (const auto& [d, b] : pb.span.left.node_map()) by_pair.emplace(std::pair(b, pb.span.right(d)), d);
    NodeMap med;
    for (const auto& [x, b] : cone.left.node_map()) {
        auto it = by_pair.find({b, cone.right(x)});
        if (it == by_pair.end())
            fail(ErrorCode::MediatorIllDefined, "no pullback element over " + x);
        med.emplace(x, it->second);
    }
    Homomorphism out(cone.left.source_ptr(), pb.apex_ptr(), std::move(med));
    require_arrow(out, ErrorCode::MediatorIllDefined, "pullback mediator");
    return out;
}

Homomorphism complement_mediator(const PullbackComplement& fp, const Homomorphism& x,
                                 const Homomorphism& y) {
    if (!same_graph(x.source_ptr(), fp.m_minus.source_ptr()) ||
        !same_graph(x.target_ptr(), y.source_ptr()) ||
        !same_graph(y.target_ptr(), fp.g_minus.target_ptr()))
        fail(ErrorCode::MediatorIllDefined, "candidate square does not match the complement");
    std::map<NodeId, std::vector<NodeId>> over;
    std::set<NodeId> from_p;
    for (const auto& [_, w] : fp.m_minus.node_map()) from_p.insert(w);
    for (const auto& [w, n] : fp.g_minus.node_map()) over[n].push_back(w);

    NodeMap u;
    for (const auto& [p, z] : x.node_map()) {
        const NodeId& w = fp.m_minus(p);
        auto [it, fresh] = u.emplace(z, w);
        if (!fresh && it->second != w)
            fail(ErrorCode::MediatorIllDefined, "node " + z + " has two images");
    }
    for (const auto& [z, _] : x.target().nodes) {
        if (u.contains(z)) continue;
        auto it = over.find(y(z));
        std::vector<NodeId> candidates;
        if (it != over.end())
            for (const auto& w : it->second)
                if (!from_p.contains(w)) candidates.push_back(w);
        if (candidates.size() != 1)
            fail(ErrorCode::MediatorIllDefined,
                 "node " + z + " has " + std::to_string(candidates.size()) + " candidate images");
        u.emplace(z, candidates.front());
    }
    Homomorphism out(x.target_ptr(), fp.apex_ptr(), std::move(u));
    require_arrow(out, ErrorCode::MediatorIllDefined, "complement mediator");
    if (!commutes(x, out, Homomorphism::identity(x.source_ptr()), fp.m_minus) ||
        !commutes(out, fp.g_minus, Homomorphism::identity(x.target_ptr()), y))
        fail(ErrorCode::MediatorIllDefined, "complement mediator does not commute");
    return out;
}

bool is_pushout(const Square& sq) {
    if (!square_commutes(sq)) fail(ErrorCode::NonCommutingSquare, "is_pushout: square does not commute");
    Pushout po = pushout(Span{sq.top, sq.left});
    try {
        return analyze_homomorphism(po_mediator(po, Cospan{sq.right, sq.bottom})).iso;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MediatorIllDefined) return false;
        throw;
    }
}

bool is_pullback(const Square& sq) {
    if (!square_commutes(sq)) fail(ErrorCode::NonCommutingSquare, "is_pullback: square does not commute");
    Pullback pb = pullback(Cospan{sq.right, sq.bottom});
    try {
        return analyze_homomorphism(pb_mediator(pb, Span{sq.top, sq.left})).iso;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MediatorIllDefined) return false;
        throw;
    }
}

bool is_final_pbc(const Square& sq) {
    if (!square_commutes(sq)) fail(ErrorCode::NonCommutingSquare, "is_final_pbc: square does not commute");
    if (!is_mono(sq.right)) return false;
    if (!is_pullback(sq)) return false;
    PullbackComplement fp = final_pbc(sq.top, sq.right);
    try {
        return analyze_homomorphism(complement_mediator(fp, sq.left, sq.bottom)).iso;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MediatorIllDefined) return false;
        throw;
    }
}

ImageFactorization image_factorization(const Homomorphism& f) {
    require_valid(f, "image_factorization");
    const Graph& S = f.source();
    Graph I;
    for (const auto& [x, y] : f.node_map()) I.nodes[y] = unite(I.nodes[y], S.node_attrs(x));
    for (const auto& [key, attrs] : S.edges) {
        EdgeKey e{f(key.first), f(key.second)};
        I.edges[e] = unite(I.edges[e], attrs);
    }
    NodeMap incl;
    for (const auto& [y, _] : I.nodes) incl.emplace(y, y);
    GraphPtr img = share(std::move(I));
    return ImageFactorization{Homomorphism(f.source_ptr(), img, f.node_map()),
                              Homomorphism(img, f.target_ptr(), std::move(incl))};
}

Graph empty_graph() { return Graph{}; }

Homomorphism initial_arrow(const GraphPtr& g) { return Homomorphism(share(empty_graph()), g, {}); }

Homomorphism factor_through(const Homomorphism& f, const Homomorphism& n) {
    if (!same_graph(f.target_ptr(), n.target_ptr()))
        fail(ErrorCode::MediatorIllDefined, "factor_through: arrows have different targets");
    NodeMap back;
    for (const auto& [y, g] : n.node_map())
        if (!back.emplace(g, y).second) fail(ErrorCode::NotMono, "factor_through: arrow is not mono");
    NodeMap u;
    for (const auto& [x, g] : f.node_map()) {
        auto it = back.find(g);
        if (it == back.end())
            fail(ErrorCode::MediatorIllDefined, "factor_through: " + x + " maps outside the image");
        u.emplace(x, it->second);
    }
    Homomorphism out(f.source_ptr(), n.source_ptr(), std::move(u));
    require_arrow(out, ErrorCode::MediatorIllDefined, "factor_through");
    return out;
}

Homomorphism retarget(const Homomorphism& f, const GraphPtr& target) {
    return Homomorphism(f.source_ptr(), target, f.node_map());
}

}  // namespace sqpo
