#pragma once

// Brute-force reference implementations used to check the library.

#include <functional>
#include <vector>

#include "sqpo/graph.hpp"

namespace oracle {

using namespace sqpo;

// Every homomorphism S → T (mono_only restricts to injective maps). Nodes are
// assigned in id order; a partial map is pruned as soon as a node attribute,
// self-loop or edge towards an assigned node fails.
inline void for_each_hom(const Graph& S, const Graph& T, bool mono_only,
                         const std::function<bool(const NodeMap&)>& visit) {
    std::vector<NodeId> order;
    for (const auto& [id, _] : S.nodes) order.push_back(id);
    NodeMap cur;
    std::set<NodeId> used;
    bool stop = false;
    std::function<void(std::size_t)> go = [&](std::size_t i) {
        if (stop) return;
        if (i == order.size()) {
            if (!visit(cur)) stop = true;
            return;
        }
        const NodeId& s = order[i];
        for (const auto& [t, t_attrs] : T.nodes) {
            if (mono_only && used.contains(t)) continue;
            if (!t_attrs.includes(S.node_attrs(s))) continue;
            bool ok = true;
            auto check = [&](const NodeId& a, const NodeId& b, const NodeId& fa, const NodeId& fb) {
                if (!S.has_edge(a, b)) return;
                if (!T.has_edge(fa, fb) || !T.edge_attrs(fa, fb).includes(S.edge_attrs(a, b))) ok = false;
            };
            check(s, s, t, t);
            for (const auto& [q, fq] : cur) {
                check(s, q, t, fq);
                check(q, s, fq, t);
            }
            if (!ok) continue;
            cur.emplace(s, t);
            used.insert(t);
            go(i + 1);
            used.erase(t);
            cur.erase(s);
            if (stop) return;
        }
    };
    go(0);
}

inline std::vector<NodeMap> all_homs(const Graph& S, const Graph& T, bool mono_only = false) {
    std::vector<NodeMap> out;
    for_each_hom(S, T, mono_only, [&](const NodeMap& m) {
        out.push_back(m);
        return true;
    });
    return out;
}

// Predicate form of a homomorphism, without shortcuts.
inline bool is_hom(const Graph& S, const Graph& T, const NodeMap& f) {
    for (const auto& [s, attrs] : S.nodes) {
        auto it = f.find(s);
        if (it == f.end() || !T.has_node(it->second)) return false;
        if (!T.node_attrs(it->second).includes(attrs)) return false;
    }
    for (const auto& [key, attrs] : S.edges) {
        NodeId a = f.at(key.first), b = f.at(key.second);
        if (!T.has_edge(a, b) || !T.edge_attrs(a, b).includes(attrs)) return false;
    }
    return true;
}

inline NodeMap after(const NodeMap& f, const NodeMap& g) {
    NodeMap out;
    for (const auto& [x, y] : f) out.emplace(x, g.at(y));
    return out;
}

// Elementwise pullback test for the square
//   P -x-> X
//   |r     |y
//   L -m-> G
// P must biject with the pairs (z, l) over a common G node, edges of P must be
// exactly the pairs of edges, attributes exactly the intersections.
inline bool is_pullback_square(const Graph& P, const Graph& X, const Graph& L,
                               const NodeMap& x, const NodeMap& r, const NodeMap& y,
                               const NodeMap& m) {
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (const auto& [z, gz] : y)
        for (const auto& [l, gl] : m)
            if (gz == gl) pairs.insert({z, l});
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& [p, _] : P.nodes) {
        std::pair<NodeId, NodeId> pr{x.at(p), r.at(p)};
        if (!pairs.contains(pr) || !seen.insert(pr).second) return false;
    }
    if (seen.size() != pairs.size()) return false;
    for (const auto& [p, attrs] : P.nodes) {
        AttrSet expect = intersect(X.node_attrs(x.at(p)), L.node_attrs(r.at(p)));
        if (!(attrs == expect)) return false;
    }
    for (const auto& [p, _] : P.nodes) {
        for (const auto& [q, _2] : P.nodes) {
            bool both = X.has_edge(x.at(p), x.at(q)) && L.has_edge(r.at(p), r.at(q));
            if (both != P.has_edge(p, q)) return false;
            if (both) {
                AttrSet expect = intersect(X.edge_attrs(x.at(p), x.at(q)), L.edge_attrs(r.at(p), r.at(q)));
                if (!(P.edge_attrs(p, q) == expect)) return false;
            }
        }
    }
    return true;
}

// Bijection test between two graphs by trying every node permutation.
inline bool brute_isomorphic(const Graph& a, const Graph& b) {
    if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
    bool found = false;
    for_each_hom(a, b, true, [&](const NodeMap& f) {
        for (const auto& [s, t] : f)
            if (!(a.node_attrs(s) == b.node_attrs(t))) return true;
        for (const auto& [key, attrs] : a.edges)
            if (!(b.edge_attrs(f.at(key.first), f.at(key.second)) == attrs)) return true;
        found = true;
        return false;
    });
    return found;
}

}  // namespace oracle
