#pragma once

// Small hand-built scenarios used as regressions.

#include "sqpo/hierarchy.hpp"

namespace models {

using namespace sqpo;

inline AttrSet shape(const char* s) { return AttrSet{{"shape", {s}}}; }

// Circle and triangle merged while a square hangs off the triangle only:
// G = {c, t, s; t->s}, L = P = {c, t}, R = {ct}.
struct MergeCase {
    GraphPtr g;
    Rule rule;
    Homomorphism m;
};

inline MergeCase circle_triangle_merge() {
    Graph g;
    g.add_node("c", shape("circle")).add_node("t", shape("triangle")).add_node("s", shape("square"));
    g.add_edge("t", "s");
    Graph L;
    L.add_node("c", shape("circle")).add_node("t", shape("triangle"));
    Graph R;
    R.add_node("ct", AttrSet{{"shape", {"circle", "triangle"}}});
    Rule r = make_rule(L, L, R, {{"c", "c"}, {"t", "t"}}, {{"c", "ct"}, {"t", "ct"}});
    GraphPtr gp = share(g);
    return {gp, r, Homomorphism(r.lhs_ptr(), gp, {{"c", "c"}, {"t", "t"}})};
}

// G = {w1, w2, b} over T = {W, B}; the G rule merges w1 with b, the T rule
// merges W with B. With `select_w2` the G rule also keeps w2 in its
// left-hand side, so every instance of W is selected.
struct TwoMerges {
    Hierarchy h;
    RuleHierarchy rules;
    InstanceAssignment instances;
};

inline TwoMerges white_black_merge(bool select_w2) {
    AttrSet white{{"color", {"white"}}}, black{{"color", {"black"}}}, both{{"color", {"black", "white"}}};
    Graph G, T;
    G.add_node("w1", white).add_node("w2", white).add_node("b", black);
    T.add_node("W", white).add_node("B", black);
    Skeleton s{{"G", "T"}, {{"G", "T"}}};
    Hierarchy h = make_hierarchy(s, {{"G", share(G)}, {"T", share(T)}},
                                 {{{"G", "T"}, {{"w1", "W"}, {"w2", "W"}, {"b", "B"}}}});

    Graph LG, RG, LT, RT;
    LG.add_node("w1", white).add_node("b", black);
    RG.add_node("wb", both);
    NodeMap p_rhs{{"w1", "wb"}, {"b", "wb"}};
    NodeMap lam{{"w1", "W"}, {"b", "B"}}, rho{{"wb", "WB"}};
    if (select_w2) {
        LG.add_node("w2", white);
        RG.add_node("w2", white);
        p_rhs.emplace("w2", "w2");
        lam.emplace("w2", "W");
        rho.emplace("w2", "WB");
    }
    NodeMap id_g;
    for (const auto& [n, _] : LG.nodes) id_g.emplace(n, n);
    LT.add_node("W", white).add_node("B", black);
    RT.add_node("WB", both);
    Rule rg = make_rule(LG, LG, RG, id_g, p_rhs);
    Rule rt = make_rule(LT, LT, RT, {{"W", "W"}, {"B", "B"}}, {{"W", "WB"}, {"B", "WB"}});
    RuleHomomorphism f{Homomorphism(rg.lhs_ptr(), rt.lhs_ptr(), lam), Homomorphism(rg.p_ptr(), rt.p_ptr(), lam),
                       Homomorphism(rg.rhs_ptr(), rt.rhs_ptr(), rho)};
    RuleHierarchy rules = make_rule_hierarchy(s, {{"G", rg}, {"T", rt}}, {{{"G", "T"}, f}});
    InstanceAssignment inst{{"G", Homomorphism(rg.lhs_ptr(), h.graphs.at("G"), id_g)},
                            {"T", Homomorphism(rt.lhs_ptr(), h.graphs.at("T"), {{"W", "W"}, {"B", "B"}})}};
    return {h, rules, inst};
}

// Three-level hierarchy H -> G -> T: circles `white` and `black` in H typed
// by a circle in G, typed by C in T; G also holds a square typed by S.
inline Hierarchy circles_hierarchy() {
    Graph H, G, T;
    H.add_node("white", shape("circle")).add_node("black", shape("circle"));
    G.add_node("circ", shape("circle")).add_node("sq", shape("square")).add_edge("circ", "sq");
    T.add_node("C", shape("circle")).add_node("S", shape("square")).add_edge("C", "S");
    Skeleton s{{"H", "G", "T"}, {{"H", "G"}, {"G", "T"}}};
    return make_hierarchy(s, {{"H", share(H)}, {"G", share(G)}, {"T", share(T)}},
                          {{{"H", "G"}, {{"white", "circ"}, {"black", "circ"}}},
                           {{"G", "T"}, {{"circ", "C"}, {"sq", "S"}}}});
}

// On the circles hierarchy's G: clone the circle into c1, c2 and merge c2
// with the square.
inline Rule clone_and_merge() {
    Graph L, P, R;
    L.add_node("circ").add_node("sq").add_edge("circ", "sq");
    P.add_node("c1").add_node("c2").add_node("sq").add_edge("c1", "sq").add_edge("c2", "sq");
    R.add_node("c1").add_node("c2sq").add_edge("c1", "c2sq").add_edge("c2sq", "c2sq");
    return make_rule(L, P, R, {{"c1", "circ"}, {"c2", "circ"}, {"sq", "sq"}},
                     {{"c1", "c1"}, {"c2", "c2sq"}, {"sq", "c2sq"}});
}

// Object versions: G0 holds a circle and a square.
inline Graph circle_square() {
    Graph g;
    g.add_node("circle", shape("circle")).add_node("square", shape("square"));
    return g;
}

// Clones the circle into two semi-circles.
inline Rule clone_circle() {
    Graph L, P;
    L.add_node("c", shape("circle"));
    P.add_node("left", shape("circle")).add_node("right", shape("circle"));
    return make_rule(L, P, P, {{"left", "c"}, {"right", "c"}}, {{"left", "left"}, {"right", "right"}});
}

// Merges a semi-circle with the square.
inline Rule merge_with_square() {
    Graph L, R;
    L.add_node("c", shape("circle")).add_node("s", shape("square"));
    R.add_node("cs", AttrSet{{"shape", {"circle", "square"}}});
    return make_rule(L, L, R, {{"c", "c"}, {"s", "s"}}, {{"c", "cs"}, {"s", "cs"}});
}

// Adds a node pointing at a square.
inline Rule add_triangle() {
    Graph L, R;
    L.add_node("s", shape("square"));
    R.add_node("s", shape("square")).add_node("t", shape("triangle")).add_edge("t", "s");
    return make_rule(L, L, R, {{"s", "s"}}, {{"s", "s"}});
}

}  // namespace models
