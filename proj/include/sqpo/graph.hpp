#pragma once

#include <compare>
#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sqpo {

using NodeId = std::string;
using EdgeKey = std::pair<NodeId, NodeId>;

/// Scalar attribute value: string, integer or boolean. Values of different
/// types never compare equal; ordering is by type (bool < int < string)
/// then by value.
class Value {
public:
    Value(bool b) : v_(b) {}
    template <std::integral T>
        requires(!std::same_as<T, bool>)
    Value(T i) : v_(static_cast<std::int64_t>(i)) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}

    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }

    bool as_bool() const { return std::get<bool>(v_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }

    std::string to_string() const;

    friend bool operator==(const Value&, const Value&) = default;
    friend std::strong_ordering operator<=>(const Value& a, const Value& b) {
        if (a.v_.index() != b.v_.index()) return a.v_.index() <=> b.v_.index();
        return std::visit(
            [&](const auto& x) -> std::strong_ordering {
                using T = std::decay_t<decltype(x)>;
                const auto& y = std::get<T>(b.v_);
                if (x < y) return std::strong_ordering::less;
                if (y < x) return std::strong_ordering::greater;
                return std::strong_ordering::equal;
            },
            a.v_);
    }

private:
    std::variant<bool, std::int64_t, std::string> v_;
};

using ValueSet = std::set<Value>;

/// Finite map from attribute key to a finite set of values. An empty value
/// set is equivalent to the key being absent; every operation that builds
/// an AttrSet drops such keys, but `set_raw` can store them so that
/// validation can be exercised.
class AttrSet {
public:
    using Map = std::map<std::string, ValueSet>;

    AttrSet() = default;
    AttrSet(std::initializer_list<std::pair<const std::string, ValueSet>> init);
    explicit AttrSet(Map entries);

    const Map& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t value_count() const;

    /// Values under `key`, or nullptr.
    const ValueSet* find(const std::string& key) const;

    void add(const std::string& key, const Value& value);
    void add(const std::string& key, const ValueSet& values);
    void set_raw(const std::string& key, ValueSet values) { entries_[key] = std::move(values); }

    /// True when every value of `other` is present here (per key).
    bool includes(const AttrSet& other) const;

    friend bool operator==(const AttrSet&, const AttrSet&) = default;

private:
    Map entries_;
};

AttrSet unite(const AttrSet& a, const AttrSet& b);
AttrSet intersect(const AttrSet& a, const AttrSet& b);
/// Per-key set difference a \ b.
AttrSet subtract(const AttrSet& a, const AttrSet& b);

/// Simple directed graph with attributed nodes and edges. At most one edge
/// per ordered pair; self-loops are allowed.
struct Graph {
    std::map<NodeId, AttrSet> nodes;
    std::map<EdgeKey, AttrSet> edges;

    Graph& add_node(const NodeId& id, AttrSet attrs = {});
    Graph& add_edge(const NodeId& source, const NodeId& target, AttrSet attrs = {});

    bool has_node(const NodeId& id) const { return nodes.contains(id); }
    bool has_edge(const NodeId& source, const NodeId& target) const {
        return edges.contains({source, target});
    }
    const AttrSet& node_attrs(const NodeId& id) const;
    const AttrSet& edge_attrs(const NodeId& source, const NodeId& target) const;

    friend bool operator==(const Graph&, const Graph&) = default;
};

using GraphPtr = std::shared_ptr<const Graph>;

inline GraphPtr share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

/// Structural equality with a pointer fast path.
bool same_graph(const GraphPtr& a, const GraphPtr& b);

/// Human-readable list of invariant violations; empty iff the graph is valid.
std::vector<std::string> validate_graph(const Graph& g);

using NodeMap = std::map<NodeId, NodeId>;

/// Node map between two graphs. Construction does not validate; use
/// analyze_homomorphism or require_valid.
class Homomorphism {
public:
    Homomorphism(GraphPtr source, GraphPtr target, NodeMap map);

    static Homomorphism identity(const GraphPtr& g);

    const Graph& source() const { return *source_; }
    const Graph& target() const { return *target_; }
    const GraphPtr& source_ptr() const { return source_; }
    const GraphPtr& target_ptr() const { return target_; }
    const NodeMap& node_map() const { return map_; }

    /// Image of a source node; throws DomainMismatch for unknown nodes.
    const NodeId& operator()(const NodeId& node) const;

    /// Preimages of a target node in source order.
    std::vector<NodeId> preimages(const NodeId& target_node) const;

    /// Same endpoints (structurally) and same node map.
    friend bool operator==(const Homomorphism& a, const Homomorphism& b);

private:
    GraphPtr source_;
    GraphPtr target_;
    NodeMap map_;
};

struct HomAnalysis {
    bool valid = false;
    bool mono = false;
    bool epi = false;
    bool iso = false;
    std::vector<std::string> problems;
};

HomAnalysis analyze_homomorphism(const Homomorphism& h);

/// Throws DomainMismatch with the first problem if `h` is not a homomorphism.
void require_valid(const Homomorphism& h, const std::string& what);

bool is_mono(const Homomorphism& h);

/// `f` then `g`: node map g ∘ f. Requires target(f) = source(g).
Homomorphism compose(const Homomorphism& f, const Homomorphism& g);

/// Inverse of an isomorphism.
Homomorphism inverse(const Homomorphism& iso);

}  // namespace sqpo
