#include "sqpo/graph.hpp"

#include <algorithm>
#include <sstream>

#include "sqpo/error.hpp"

namespace sqpo {

std::string Value::to_string() const {
    if (is_bool()) return as_bool() ? "true" : "false";
    if (is_int()) return std::to_string(as_int());
    return '"' + as_string() + '"';
}

AttrSet::AttrSet(std::initializer_list<std::pair<const std::string, ValueSet>> init) {
    for (const auto& [key, values] : init) add(key, values);
}

AttrSet::AttrSet(Map entries) {
    for (auto& [key, values] : entries) add(key, values);
}

std::size_t AttrSet::value_count() const {
    std::size_t n = 0;
    for (const auto& [_, values] : entries_) n += values.size();
    return n;
}

const ValueSet* AttrSet::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

void AttrSet::add(const std::string& key, const Value& value) { entries_[key].insert(value); }

void AttrSet::add(const std::string& key, const ValueSet& values) {
    if (values.empty()) return;
    entries_[key].insert(values.begin(), values.end());
}

bool AttrSet::includes(const AttrSet& other) const {
    for (const auto& [key, values] : other.entries_) {
        if (values.empty()) continue;
        const ValueSet* mine = find(key);
        if (!mine) return false;
        if (!std::includes(mine->begin(), mine->end(), values.begin(), values.end()))
            return false;
    }
    return true;
}

AttrSet unite(const AttrSet& a, const AttrSet& b) {
    AttrSet out = a;
    for (const auto& [key, values] : b.entries()) out.add(key, values);
    AttrSet::Map cleaned;
    for (const auto& [key, values] : out.entries())
        if (!values.empty()) cleaned.emplace(key, values);
    return AttrSet(std::move(cleaned));
}

AttrSet intersect(const AttrSet& a, const AttrSet& b) {
    AttrSet::Map out;
    for (const auto& [key, values] : a.entries()) {
        const ValueSet* other = b.find(key);
        if (!other) continue;
        ValueSet common;
        std::set_intersection(values.begin(), values.end(), other->begin(), other->end(),
                              std::inserter(common, common.end()));
        if (!common.empty()) out.emplace(key, std::move(common));
    }
    return AttrSet(std::move(out));
}

AttrSet subtract(const AttrSet& a, const AttrSet& b) {
    AttrSet::Map out;
    for (const auto& [key, values] : a.entries()) {
        const ValueSet* other = b.find(key);
        ValueSet rest;
        if (!other) {
            rest = values;
        } else {
            std::set_difference(values.begin(), values.end(), other->begin(), other->end(),
                                std::inserter(rest, rest.end()));
        }
        if (!rest.empty()) out.emplace(key, std::move(rest));
    }
    return AttrSet(std::move(out));
}

Graph& Graph::add_node(const NodeId& id, AttrSet attrs) {
    nodes[id] = std::move(attrs);
    return *this;
}

Graph& Graph::add_edge(const NodeId& source, const NodeId& target, AttrSet attrs) {
    edges[{source, target}] = std::move(attrs);
    return *this;
}

namespace {
const AttrSet kNoAttrs;
}

const AttrSet& Graph::node_attrs(const NodeId& id) const {
    auto it = nodes.find(id);
    return it == nodes.end() ? kNoAttrs : it->second;
}

const AttrSet& Graph::edge_attrs(const NodeId& source, const NodeId& target) const {
    auto it = edges.find({source, target});
    return it == edges.end() ? kNoAttrs : it->second;
}

bool same_graph(const GraphPtr& a, const GraphPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

std::vector<std::string> validate_graph(const Graph& g) {
    std::vector<std::string> out;
    auto check_attrs = [&](const std::string& where, const AttrSet& attrs) {
        for (const auto& [key, values] : attrs.entries())
            if (values.empty()) out.push_back("empty value set at " + where + "." + key);
    };
    for (const auto& [id, attrs] : g.nodes) {
        if (id.empty()) out.push_back("empty node id");
        if (id.find('|') != std::string::npos)
            out.push_back("reserved separator '|' in node id " + id);
        check_attrs(id, attrs);
    }
    for (const auto& [key, attrs] : g.edges) {
        const auto& [s, t] = key;
        if (!g.has_node(s)) out.push_back("dangling endpoint " + s + " of edge " + s + "->" + t);
        if (!g.has_node(t)) out.push_back("dangling endpoint " + t + " of edge " + s + "->" + t);
        check_attrs(s + "->" + t, attrs);
    }
    return out;
}

Homomorphism::Homomorphism(GraphPtr source, GraphPtr target, NodeMap map)
    : source_(std::move(source)), target_(std::move(target)), map_(std::move(map)) {
    if (!source_ || !target_) fail(ErrorCode::DomainMismatch, "homomorphism with null endpoint");
}

Homomorphism Homomorphism::identity(const GraphPtr& g) {
    NodeMap m;
    for (const auto& [id, _] : g->nodes) m.emplace(id, id);
    return Homomorphism(g, g, std::move(m));
}

const NodeId& Homomorphism::operator()(const NodeId& node) const {
    auto it = map_.find(node);
    if (it == map_.end()) fail(ErrorCode::DomainMismatch, "node " + node + " has no image");
    return it->second;
}

std::vector<NodeId> Homomorphism::preimages(const NodeId& target_node) const {
    std::vector<NodeId> out;
    for (const auto& [s, t] : map_)
        if (t == target_node) out.push_back(s);
    return out;
}

bool operator==(const Homomorphism& a, const Homomorphism& b) {
    return a.map_ == b.map_ && same_graph(a.source_, b.source_) && same_graph(a.target_, b.target_);
}

HomAnalysis analyze_homomorphism(const Homomorphism& h) {
    HomAnalysis r;
    const Graph& src = h.source();
    const Graph& tgt = h.target();
    const NodeMap& map = h.node_map();

    for (const auto& [id, attrs] : src.nodes) {
        auto it = map.find(id);
        if (it == map.end()) {
            r.problems.push_back("node " + id + " has no image");
            continue;
        }
        if (!tgt.has_node(it->second)) {
            r.problems.push_back("image " + it->second + " of " + id + " is not a target node");
            continue;
        }
        if (!tgt.node_attrs(it->second).includes(attrs))
            r.problems.push_back("attributes of " + id + " not included in " + it->second);
    }
    for (const auto& [id, _] : map)
        if (!src.has_node(id)) r.problems.push_back("map entry for unknown source node " + id);
    if (!r.problems.empty()) return r;

    for (const auto& [key, attrs] : src.edges) {
        const NodeId& s = map.at(key.first);
        const NodeId& t = map.at(key.second);
        if (!tgt.has_edge(s, t)) {
            r.problems.push_back("edge " + key.first + "->" + key.second + " not preserved");
            continue;
        }
        if (!tgt.edge_attrs(s, t).includes(attrs))
            r.problems.push_back("attributes of edge " + key.first + "->" + key.second +
                                 " not included");
    }
    if (!r.problems.empty()) return r;
    r.valid = true;

    std::set<NodeId> images;
    for (const auto& [_, t] : map) images.insert(t);
    r.mono = images.size() == map.size();

    bool surjective = images.size() == tgt.nodes.size();
    if (surjective) {
        std::map<NodeId, AttrSet> reached;
        for (const auto& [s, t] : map) reached[t] = unite(reached[t], src.node_attrs(s));
        for (const auto& [id, attrs] : tgt.nodes)
            if (!reached[id].includes(attrs)) surjective = false;
    }
    r.epi = surjective;

    if (r.mono && r.epi && src.edges.size() == tgt.edges.size()) {
        bool exact = true;
        for (const auto& [s, t] : map)
            if (!(src.node_attrs(s) == tgt.node_attrs(t))) exact = false;
        for (const auto& [key, attrs] : src.edges)
            if (!(tgt.edge_attrs(map.at(key.first), map.at(key.second)) == attrs)) exact = false;
        r.iso = exact;
    }
    return r;
}

void require_valid(const Homomorphism& h, const std::string& what) {
    HomAnalysis a = analyze_homomorphism(h);
    if (!a.valid) fail(ErrorCode::DomainMismatch, what + ": " + a.problems.front());
}

bool is_mono(const Homomorphism& h) {
    std::set<NodeId> images;
    for (const auto& [_, t] : h.node_map())
        if (!images.insert(t).second) return false;
    return true;
}

Homomorphism compose(const Homomorphism& f, const Homomorphism& g) {
    if (!same_graph(f.target_ptr(), g.source_ptr()))
        fail(ErrorCode::DomainMismatch, "compose: target of first arrow differs from source of second");
    NodeMap m;
    for (const auto& [s, t] : f.node_map()) m.emplace(s, g(t));
    return Homomorphism(f.source_ptr(), g.target_ptr(), std::move(m));
}

Homomorphism inverse(const Homomorphism& iso) {
    NodeMap m;
    for (const auto& [s, t] : iso.node_map()) m.emplace(t, s);
    return Homomorphism(iso.target_ptr(), iso.source_ptr(), std::move(m));
}

}  // namespace sqpo
