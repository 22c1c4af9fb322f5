#include <gtest/gtest.h>

#include "check.hpp"
#include "criteria.hpp"
#include "oracle.hpp"
#include "sqpo/category.hpp"
#include "sqpo/matching.hpp"

using namespace sqpo;

namespace {

GraphPtr nodes(std::initializer_list<const char*> ids) {
    Graph g;
    for (const char* id : ids) g.add_node(id);
    return share(g);
}

Homomorphism hom(const GraphPtr& s, const GraphPtr& t, NodeMap m) { return Homomorphism(s, t, std::move(m)); }

}  // namespace

TEST(Pushout, IdentitySpan) {
    GraphPtr x = nodes({"x"});
    Pushout po = pushout(Span{Homomorphism::identity(x), Homomorphism::identity(x)});
    EXPECT_EQ(po.apex(), *x);
    EXPECT_TRUE(analyze_homomorphism(po.cospan.left).iso);
}

TEST(Pushout, MergeCreatesLoop) {
    GraphPtr A = nodes({"p", "q"});
    GraphPtr B = nodes({"m"});
    Graph c;
    c.add_node("p").add_node("q").add_edge("p", "q");
    GraphPtr C = share(c);
    Pushout po2 = pushout(Span{hom(A, B, {{"p", "m"}, {"q", "m"}}), hom(A, C, {{"p", "p"}, {"q", "q"}})});
    Graph expected;
    expected.add_node("m").add_edge("m", "m");
    EXPECT_EQ(po2.apex(), expected);

    // Every cocone into a target of at most two nodes factors uniquely.
    for (int n = 1; n <= 2; ++n) {
        Graph t;
        for (int i = 0; i < n; ++i) t.add_node("t" + std::to_string(i));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) t.add_edge("t" + std::to_string(i), "t" + std::to_string(j));
        GraphPtr T = share(t);
        for (const NodeMap& fb : oracle::all_homs(*B, *T))
            for (const NodeMap& fc : oracle::all_homs(*C, *T)) {
                if (oracle::after(hom(A, B, {{"p", "m"}, {"q", "m"}}).node_map(), fb) !=
                    oracle::after(hom(A, C, {{"p", "p"}, {"q", "q"}}).node_map(), fc))
                    continue;
                int count = 0;
                for (const NodeMap& u : oracle::all_homs(po2.apex(), *T))
                    if (oracle::after(po2.cospan.left.node_map(), u) == fb &&
                        oracle::after(po2.cospan.right.node_map(), u) == fc)
                        ++count;
                EXPECT_EQ(count, 1);
                Homomorphism med = po_mediator(po2, Cospan{hom(B, T, fb), hom(C, T, fc)});
                EXPECT_EQ(oracle::after(po2.cospan.left.node_map(), med.node_map()), fb);
            }
    }
}

TEST(Pushout, MergeOfCircleAndTriangle) {
    Graph p1;
    p1.add_node("c").add_node("t").add_node("s").add_edge("t", "s");
    GraphPtr P1 = share(p1);
    GraphPtr R1 = share(Graph(p1).add_node("x"));
    Graph r;
    r.add_node("m").add_node("s").add_edge("m", "s");
    GraphPtr R = share(r);
    Pushout po = pushout(Span{hom(P1, R1, {{"c", "c"}, {"t", "t"}, {"s", "s"}}),
                              hom(P1, R, {{"c", "m"}, {"t", "m"}, {"s", "s"}})});
    Graph expected;
    expected.add_node("c_t").add_node("s").add_node("x").add_edge("c_t", "s");
    EXPECT_EQ(po.apex(), expected);
}

TEST(Pushout, RejectsSpanWithDifferentSources) {
    GraphPtr a = nodes({"a"}), b = nodes({"b"});
    EXPECT_EQ(code_of([&] { pushout(Span{Homomorphism::identity(a), Homomorphism::identity(b)}); }),
              ErrorCode::InvalidSpan);
}

TEST(Pullback, IdentityCospanAndOverlap) {
    Graph g;
    g.add_node("x", {{"k", {1, 2}}}).add_node("y").add_edge("x", "y");
    GraphPtr G = share(g);
    Pullback pb = pullback(Cospan{Homomorphism::identity(G), Homomorphism::identity(G)});
    EXPECT_TRUE(isomorphic(pb.apex_ptr(), G));

    GraphPtr G2 = nodes({"ct", "s", "o"});
    GraphPtr R1 = nodes({"ct", "s"});
    GraphPtr L2 = nodes({"ct"});
    Pullback ov = pullback(Cospan{hom(R1, G2, {{"ct", "ct"}, {"s", "s"}}), hom(L2, G2, {{"ct", "ct"}})});
    EXPECT_EQ(ov.apex(), *nodes({"ct&ct"}));
    EXPECT_TRUE(is_mono(ov.span.left));
    EXPECT_TRUE(is_mono(ov.span.right));

    GraphPtr L3 = nodes({"o"});
    Pullback disjoint = pullback(Cospan{hom(R1, G2, {{"ct", "ct"}, {"s", "s"}}), hom(L3, G2, {{"o", "o"}})});
    EXPECT_TRUE(disjoint.apex().nodes.empty());
}

TEST(Pullback, AttributesIntersect) {
    Graph b, c, d;
    b.add_node("b", {{"k", {1, 2}}});
    c.add_node("c", {{"k", {2, 3}}});
    d.add_node("d", {{"k", {1, 2, 3}}});
    GraphPtr B = share(b), C = share(c), D = share(d);
    Pullback pb = pullback(Cospan{hom(B, D, {{"b", "d"}}), hom(C, D, {{"c", "d"}})});
    EXPECT_EQ(pb.apex().node_attrs("b&c"), (AttrSet{{"k", {2}}}));
}

TEST(FinalPbc, CloneReconnectsBothCopies) {
    GraphPtr P = nodes({"c1", "c2"});
    GraphPtr L = nodes({"c"});
    Graph g;
    g.add_node("c").add_node("s").add_edge("c", "s");
    GraphPtr G = share(g);
    PullbackComplement fp = final_pbc(hom(P, L, {{"c1", "c"}, {"c2", "c"}}), hom(L, G, {{"c", "c"}}));
    Graph expected;
    expected.add_node("c_c1").add_node("c_c2").add_node("s").add_edge("c_c1", "s").add_edge("c_c2", "s");
    EXPECT_EQ(fp.apex(), expected);
    EXPECT_TRUE(is_pullback(Square{fp.r, fp.m_minus, fp.m, fp.g_minus}));
    EXPECT_TRUE(is_final_pbc(Square{fp.r, fp.m_minus, fp.m, fp.g_minus}));
}

TEST(FinalPbc, DeleteRemovesDanglingEdges) {
    GraphPtr P = share(empty_graph());
    GraphPtr L = nodes({"n"});
    Graph g;
    g.add_node("n").add_node("k").add_edge("n", "k");
    GraphPtr G = share(g);
    PullbackComplement fp = final_pbc(hom(P, L, {}), hom(L, G, {{"n", "n"}}));
    EXPECT_EQ(fp.apex(), *nodes({"k"}));
    Square sq{fp.r, fp.m_minus, fp.m, fp.g_minus};
    EXPECT_TRUE(oracle::is_pullback_square(fp.r.source(), fp.apex(), fp.m.source(), fp.m_minus.node_map(),
                                           fp.r.node_map(), fp.g_minus.node_map(), fp.m.node_map()));
    EXPECT_TRUE(is_final_pbc(sq));
}

TEST(FinalPbc, AttributesAreSubtracted) {
    Graph l, p, g;
    l.add_node("n", {{"k", {1, 2}}});
    p.add_node("n", {{"k", {1}}});
    g.add_node("n", {{"k", {1, 2, 3}}});
    GraphPtr L = share(l), P = share(p), G = share(g);
    PullbackComplement fp = final_pbc(hom(P, L, {{"n", "n"}}), hom(L, G, {{"n", "n"}}));
    EXPECT_EQ(fp.apex().node_attrs("n"), (AttrSet{{"k", {1, 3}}}));
}

TEST(FinalPbc, RequiresMonoMatch) {
    GraphPtr L = nodes({"a", "b"}), G = nodes({"x"});
    EXPECT_EQ(code_of([&] { final_pbc(Homomorphism::identity(L), hom(L, G, {{"a", "x"}, {"b", "x"}})); }),
              ErrorCode::NotMono);
}

TEST(Mediators, OfTheConstructionItself) {
    GraphPtr A = nodes({"a"}), B = nodes({"a", "b"}), C = nodes({"a", "c"});
    Pushout po = pushout(Span{hom(A, B, {{"a", "a"}}), hom(A, C, {{"a", "a"}})});
    EXPECT_TRUE(analyze_homomorphism(po_mediator(po, po.cospan)).iso);
    EXPECT_EQ(po_mediator(po, po.cospan), Homomorphism::identity(po.apex_ptr()));

    Pullback pb = pullback(po.cospan);
    EXPECT_EQ(pb_mediator(pb, pb.span), Homomorphism::identity(pb.apex_ptr()));
}

TEST(Mediators, IllDefinedCocone) {
    GraphPtr A = nodes({"a"}), B = nodes({"b"}), C = nodes({"c"}), T = nodes({"t1", "t2"});
    Pushout po = pushout(Span{hom(A, B, {{"a", "b"}}), hom(A, C, {{"a", "c"}})});
    EXPECT_EQ(code_of([&] { po_mediator(po, Cospan{hom(B, T, {{"b", "t1"}}), hom(C, T, {{"c", "t2"}})}); }),
              ErrorCode::MediatorIllDefined);

    Pullback pb = pullback(Cospan{hom(B, T, {{"b", "t1"}}), hom(C, T, {{"c", "t1"}})});
    GraphPtr X = nodes({"x"});
    Pullback pb2 = pullback(Cospan{hom(B, T, {{"b", "t1"}}), hom(C, T, {{"c", "t2"}})});
    EXPECT_TRUE(pb2.apex().nodes.empty());
    EXPECT_EQ(code_of([&] { pb_mediator(pb2, Span{hom(X, B, {{"x", "b"}}), hom(X, C, {{"x", "c"}})}); }),
              ErrorCode::MediatorIllDefined);
    EXPECT_EQ(pb_mediator(pb, Span{hom(X, B, {{"x", "b"}}), hom(X, C, {{"x", "c"}})}).node_map(),
              (NodeMap{{"x", "b&c"}}));
}

TEST(Squares, MergeOfCircleAndTriangleIsNotFinal) {
    models::MergeCase mc = models::circle_triangle_merge();
    RewriteRecord rec = apply_rule(mc.g, mc.rule, mc.m);
    Square fwd{rec.rule.r_minus, rec.m_minus, rec.m, rec.g_arrow_minus};
    Square back{rec.rule.r_plus, rec.m_minus, rec.m_plus, rec.g_arrow_plus};
    EXPECT_TRUE(is_final_pbc(fwd));
    EXPECT_TRUE(is_pushout(back));
    EXPECT_FALSE(is_final_pbc(back));
}

TEST(Squares, NonCommutingSquareIsRejected) {
    GraphPtr A = nodes({"a"}), B = nodes({"b1", "b2"});
    Homomorphism f = hom(A, B, {{"a", "b1"}}), g = hom(A, B, {{"a", "b2"}});
    Homomorphism id = Homomorphism::identity(B);
    EXPECT_EQ(code_of([&] { is_pushout(Square{f, g, id, id}); }), ErrorCode::NonCommutingSquare);
}

TEST(ImageFactorization, Cases) {
    GraphPtr A = nodes({"p", "q"}), B = nodes({"m", "z"});
    Homomorphism merge = hom(A, B, {{"p", "m"}, {"q", "m"}});
    ImageFactorization f = image_factorization(merge);
    EXPECT_EQ(f.epi.target(), *nodes({"m"}));
    EXPECT_EQ(compose(f.epi, f.mono), merge);
    EXPECT_TRUE(is_mono(f.mono));

    Homomorphism mono = hom(A, B, {{"p", "m"}, {"q", "z"}});
    EXPECT_TRUE(analyze_homomorphism(image_factorization(mono).epi).iso);

    Graph s, t;
    s.add_node("a", {{"k", {1}}}).add_node("b", {{"k", {2}}}).add_node("c").add_edge("a", "c");
    t.add_node("x", {{"k", {1, 2, 3}}}).add_node("y").add_edge("x", "y").add_edge("y", "x");
    Homomorphism partial = hom(share(s), share(t), {{"a", "x"}, {"b", "x"}, {"c", "y"}});
    ImageFactorization pf = image_factorization(partial);
    EXPECT_EQ(compose(pf.epi, pf.mono), partial);
    EXPECT_EQ(pf.epi.target().node_attrs("x"), (AttrSet{{"k", {1, 2}}}));
    EXPECT_TRUE(pf.epi.target().has_edge("x", "y"));
    EXPECT_FALSE(pf.epi.target().has_edge("y", "x"));
}

TEST(InitialArrow, IsUnique) {
    GraphPtr e = share(empty_graph());
    EXPECT_EQ(initial_arrow(e), Homomorphism::identity(e));
    GraphPtr ab = nodes({"a", "b"});
    Homomorphism u = initial_arrow(ab);
    EXPECT_TRUE(u.node_map().empty());
    EXPECT_TRUE(is_mono(u));
    EXPECT_EQ(oracle::all_homs(*e, *ab).size(), 1u);
}

TEST(FactorThrough, Errors) {
    GraphPtr X = nodes({"x"}), Y = nodes({"y"}), G = nodes({"y", "z"});
    Homomorphism n = hom(Y, G, {{"y", "y"}});
    EXPECT_EQ(factor_through(hom(X, G, {{"x", "y"}}), n).node_map(), (NodeMap{{"x", "y"}}));
    EXPECT_EQ(code_of([&] { factor_through(hom(X, G, {{"x", "z"}}), n); }), ErrorCode::MediatorIllDefined);
}

TEST(CategoryProperties, UniversalProperties) {
    criteria::Tally t = criteria::universal_properties(11, 20);
    EXPECT_TRUE(t.ok()) << (t.notes.empty() ? "" : t.notes.front());
}

TEST(CategoryProperties, FinalComplements) {
    criteria::Tally t = criteria::final_complements(12, 20);
    EXPECT_TRUE(t.ok()) << (t.notes.empty() ? "" : t.notes.front());
}
