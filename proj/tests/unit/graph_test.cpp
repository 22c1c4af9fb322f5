#include <gtest/gtest.h>

#include "gen.hpp"
#include "oracle.hpp"
#include "sqpo/codec.hpp"
#include "sqpo/error.hpp"
#include "sqpo/matching.hpp"

using namespace sqpo;

namespace {

Graph triangle() {
    Graph g;
    g.add_node("a", {{"k", {1}}}).add_node("b").add_node("c", {{"t", {"x", "y"}}});
    g.add_edge("a", "b").add_edge("b", "c", {{"w", {true}}}).add_edge("c", "a");
    return g;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::Usage;
}

}  // namespace

TEST(Value, OrdersByTypeThenValue) {
    EXPECT_LT(Value(true), Value(0));
    EXPECT_LT(Value(5), Value("a"));
    EXPECT_LT(Value("a"), Value("b"));
    EXPECT_NE(Value(1), Value("1"));
    EXPECT_EQ(Value(3).to_string(), "3");
}

TEST(AttrSet, EmptyValueSetsAreDropped) {
    AttrSet a{{"k", {}}, {"t", {"x"}}};
    EXPECT_EQ(a.entries().size(), 1u);
    EXPECT_TRUE(a.includes(AttrSet{}));
    EXPECT_FALSE(AttrSet{}.includes(a));
    EXPECT_EQ(unite(a, AttrSet{{"t", {"y"}}}), (AttrSet{{"t", {"x", "y"}}}));
    EXPECT_EQ(intersect(a, AttrSet{{"t", {"y"}}}), AttrSet{});
    EXPECT_EQ(subtract(AttrSet{{"t", {"x", "y"}}}, a), (AttrSet{{"t", {"y"}}}));
}

TEST(Graph, ValidationReportsProblems) {
    Graph g = triangle();
    EXPECT_TRUE(validate_graph(g).empty());
    g.edges[{"a", "zz"}] = {};
    EXPECT_FALSE(validate_graph(g).empty());
    Graph h;
    h.add_node("a");
    AttrSet raw;
    raw.set_raw("k", {});
    h.nodes["a"] = raw;
    EXPECT_FALSE(validate_graph(h).empty());
}

TEST(Graph, EqualityIsStrict) {
    Graph a = triangle();
    Graph b = triangle();
    EXPECT_TRUE(same_graph(share(a), share(b)));
    b.nodes["b"].add("k", Value(1));
    EXPECT_FALSE(same_graph(share(a), share(b)));
    Graph renamed;
    for (const auto& [id, attrs] : a.nodes) renamed.add_node(id + "'", attrs);
    for (const auto& [e, attrs] : a.edges) renamed.add_edge(e.first + "'", e.second + "'", attrs);
    EXPECT_FALSE(same_graph(share(a), share(renamed)));
    EXPECT_TRUE(isomorphic(share(a), share(renamed)));
}

TEST(Codec, RoundTripIsExact) {
    gen::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        Graph g = gen::random_graph(rng, gen::uniform(rng, 0, 7));
        std::string text = encode_graph(g);
        Graph back = decode_graph(text);
        EXPECT_EQ(back, g);
        EXPECT_EQ(encode_graph(back), text);
    }
}

TEST(Codec, KeyOrderDoesNotMatter) {
    Graph a = decode_graph(R"({"nodes": {"b": {}, "a": {"k": [2, 1]}}, "edges": {"a|b": {}}})");
    Graph b = decode_graph(R"({"edges": {"a|b": {}}, "nodes": {"a": {"k": [1, 2]}, "b": {}}})");
    EXPECT_EQ(encode_graph(a), encode_graph(b));
    EXPECT_EQ(encode_graph(a), R"({"edges":{"a|b":{}},"nodes":{"a":{"k":[1,2]},"b":{}}})");
}

TEST(Codec, MalformedInputIsRejected) {
    EXPECT_EQ(code_of([] { decode_graph("{\"nodes\": "); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { decode_graph("[]"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { decode_graph(R"({"nodes": {}, "edges": {"a|b": {}}})"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { decode_graph(R"({"nodes": {"a": {"k": 1}}, "edges": {}})"); }), ErrorCode::SchemaError);
}

TEST(Homomorphism, Analysis) {
    GraphPtr g = share(triangle());
    Graph two;
    two.add_node("p").add_node("q").add_edge("p", "q");
    GraphPtr t = share(two);
    HomAnalysis a = analyze_homomorphism(Homomorphism(t, g, {{"p", "a"}, {"q", "b"}}));
    EXPECT_TRUE(a.valid);
    EXPECT_TRUE(a.mono);
    EXPECT_FALSE(a.epi);
    EXPECT_FALSE(analyze_homomorphism(Homomorphism(t, g, {{"p", "b"}, {"q", "a"}})).valid);
    EXPECT_TRUE(analyze_homomorphism(Homomorphism::identity(g)).iso);
    Homomorphism f(t, g, {{"p", "a"}, {"q", "b"}});
    EXPECT_EQ(compose(Homomorphism::identity(t), f), f);
    EXPECT_EQ(code_of([&] { f("zz"); }), ErrorCode::DomainMismatch);
}

TEST(Matching, AgreesWithBruteForce) {
    gen::Rng rng(5);
    for (int i = 0; i < 150; ++i) {
        GraphPtr host = share(gen::random_graph(rng, gen::uniform(rng, 1, 6), "h", 0.4));
        GraphPtr pat = share(gen::random_graph(rng, gen::uniform(rng, 0, 3), "p", 0.3, 0.2));
        auto found = find_monomorphisms(pat, host);
        auto brute = oracle::all_homs(*pat, *host, true);
        ASSERT_EQ(found.size(), brute.size());
        std::set<NodeMap> a, b(brute.begin(), brute.end());
        for (const auto& m : found) a.insert(m.node_map());
        EXPECT_EQ(a, b);
        EXPECT_EQ(count_monomorphisms(pat, host, 1000), found.size());
        if (!found.empty()) EXPECT_EQ(first_monomorphism(pat, host)->node_map(), found.front().node_map());
    }
}

TEST(Matching, IsomorphismAgreesWithBruteForce) {
    gen::Rng rng(6);
    for (int i = 0; i < 150; ++i) {
        GraphPtr a = share(gen::random_graph(rng, gen::uniform(rng, 1, 5)));
        GraphPtr b = gen::coin(rng, 0.5) ? share(gen::random_graph(rng, static_cast<int>(a->nodes.size()), "m"))
                                         : relabel(a, {{"n0", "z"}}).target_ptr();
        EXPECT_EQ(isomorphic(a, b), oracle::brute_isomorphic(*a, *b));
    }
}
