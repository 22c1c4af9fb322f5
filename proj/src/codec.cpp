#include "sqpo/codec.hpp"

#include "sqpo/error.hpp"

namespace sqpo {
namespace {

Json value_to_json(const Value& v) {
    if (v.is_bool()) return v.as_bool();
    if (v.is_int()) return v.as_int();
    return v.as_string();
}

Value value_from_json(const Json& j, const std::string& where) {
    if (j.is_boolean()) return Value(j.get<bool>());
    if (j.is_number_integer()) return Value(j.get<std::int64_t>());
    if (j.is_string()) return Value(j.get<std::string>());
    fail(ErrorCode::SchemaError, where + ": attribute values must be string, integer or boolean");
}

void require_object(const Json& j, const std::string& where) {
    if (!j.is_object()) fail(ErrorCode::SchemaError, where + ": expected an object");
}

}  // namespace

Json attrs_to_json(const AttrSet& attrs) {
    Json out = Json::object();
    for (const auto& [key, values] : attrs.entries()) {
        Json arr = Json::array();
        for (const auto& v : values) arr.push_back(value_to_json(v));
        out[key] = std::move(arr);
    }
    return out;
}

AttrSet attrs_from_json(const Json& j, const std::string& where) {
    require_object(j, where);
    AttrSet out;
    for (const auto& [key, arr] : j.items()) {
        if (!arr.is_array()) fail(ErrorCode::SchemaError, where + "." + key + ": expected an array");
        ValueSet values;
        for (const auto& v : arr) values.insert(value_from_json(v, where + "." + key));
        out.set_raw(key, std::move(values));
    }
    return out;
}

Json graph_to_json(const Graph& g) {
    Json nodes = Json::object();
    for (const auto& [id, attrs] : g.nodes) nodes[id] = attrs_to_json(attrs);
    Json edges = Json::object();
    for (const auto& [key, attrs] : g.edges) edges[key.first + "|" + key.second] = attrs_to_json(attrs);
    return Json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

Graph graph_from_json(const Json& j, const std::string& where) {
    require_object(j, where);
    for (const auto& [key, _] : j.items())
        if (key != "nodes" && key != "edges")
            fail(ErrorCode::SchemaError, where + "." + key + ": unknown field");
    if (!j.contains("nodes")) fail(ErrorCode::SchemaError, where + ".nodes: missing");
    Graph g;
    const Json& nodes = j.at("nodes");
    require_object(nodes, where + ".nodes");
    for (const auto& [id, attrs] : nodes.items()) {
        if (id.empty() || id.find('|') != std::string::npos)
            fail(ErrorCode::SchemaError, where + ".nodes: invalid node id '" + id + "'");
        g.nodes.emplace(id, attrs_from_json(attrs, where + ".nodes." + id));
    }
    if (j.contains("edges")) {
        const Json& edges = j.at("edges");
        require_object(edges, where + ".edges");
        for (const auto& [key, attrs] : edges.items()) {
            auto bar = key.find('|');
            if (bar == std::string::npos || key.find('|', bar + 1) != std::string::npos)
                fail(ErrorCode::SchemaError, where + ".edges." + key + ": expected '<src>|<tgt>'");
            NodeId s = key.substr(0, bar);
            NodeId t = key.substr(bar + 1);
            if (!g.has_node(s) || !g.has_node(t))
                fail(ErrorCode::SchemaError,
                     where + ".edges." + key + ": edge references unknown node");
            g.edges.emplace(EdgeKey{s, t}, attrs_from_json(attrs, where + ".edges." + key));
        }
    }
    return g;
}

Json node_map_to_json(const NodeMap& map) {
    Json out = Json::object();
    for (const auto& [s, t] : map) out[s] = t;
    return out;
}

NodeMap node_map_from_json(const Json& j, const std::string& where) {
    require_object(j, where);
    NodeMap out;
    for (const auto& [s, t] : j.items()) {
        if (!t.is_string()) fail(ErrorCode::SchemaError, where + "." + s + ": expected a node id");
        out.emplace(s, t.get<std::string>());
    }
    return out;
}

std::string dump_canonical(const Json& j) { return j.dump(); }

std::string encode_graph(const Graph& g) { return dump_canonical(graph_to_json(g)); }

Json parse_json(std::string_view text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::ParseError,
             what + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

Graph decode_graph(std::string_view text) { return graph_from_json(parse_json(text, "graph")); }

namespace {

void require_fields(const Json& j, const std::string& where, std::initializer_list<const char*> fields) {
    require_object(j, where);
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* f : fields) known = known || key == f;
        if (!known) fail(ErrorCode::SchemaError, where + "." + key + ": unknown field");
    }
    for (const char* f : fields)
        if (!j.contains(f)) fail(ErrorCode::SchemaError, where + "." + f + ": missing");
}

std::string edge_key(const SkeletonEdge& e) { return e.first + "->" + e.second; }

SkeletonEdge parse_edge_key(const std::string& key, const std::string& where) {
    auto arrow = key.find("->");
    if (arrow == std::string::npos || arrow == 0 || arrow + 2 == key.size() ||
        key.find("->", arrow + 2) != std::string::npos)
        fail(ErrorCode::SchemaError, where + "." + key + ": expected '<s>-><t>'");
    return {key.substr(0, arrow), key.substr(arrow + 2)};
}

void check_vertex(const std::string& v, const std::string& where) {
    if (v.empty() || v.find("->") != std::string::npos)
        fail(ErrorCode::SchemaError, where + ": invalid node name '" + v + "'");
}

}  // namespace

Json rule_to_json(const Rule& r) {
    Json j;
    j["lhs"] = graph_to_json(r.lhs());
    j["p"] = graph_to_json(r.p());
    j["rhs"] = graph_to_json(r.rhs());
    j["p_lhs"] = node_map_to_json(r.r_minus.node_map());
    j["p_rhs"] = node_map_to_json(r.r_plus.node_map());
    return j;
}

Rule rule_from_json(const Json& j, const std::string& where) {
    require_fields(j, where, {"lhs", "p", "rhs", "p_lhs", "p_rhs"});
    return make_rule(graph_from_json(j.at("lhs"), where + ".lhs"), graph_from_json(j.at("p"), where + ".p"),
                     graph_from_json(j.at("rhs"), where + ".rhs"),
                     node_map_from_json(j.at("p_lhs"), where + ".p_lhs"),
                     node_map_from_json(j.at("p_rhs"), where + ".p_rhs"));
}

Homomorphism instance_from_json(const Json& j, const GraphPtr& pattern, const GraphPtr& host,
                                const std::string& where) {
    Homomorphism m(pattern, host, node_map_from_json(j, where));
    HomAnalysis a = analyze_homomorphism(m);
    if (!a.valid) fail(ErrorCode::InstanceMismatch, where + ": " + a.problems.front());
    if (!a.mono) fail(ErrorCode::NotMono, where + ": instance is not injective");
    return m;
}

Json hierarchy_to_json(const Hierarchy& h) {
    Json j;
    j["graphs"] = Json::object();
    j["typing"] = Json::object();
    for (const auto& [v, g] : h.graphs) j["graphs"][v] = graph_to_json(*g);
    for (const auto& [e, f] : h.homs) j["typing"][edge_key(e)] = node_map_to_json(f.node_map());
    return j;
}

Hierarchy hierarchy_from_json(const Json& j, const std::string& where) {
    require_fields(j, where, {"graphs", "typing"});
    require_object(j.at("graphs"), where + ".graphs");
    require_object(j.at("typing"), where + ".typing");
    Skeleton s;
    std::map<Vertex, GraphPtr> graphs;
    for (const auto& [v, g] : j.at("graphs").items()) {
        check_vertex(v, where + ".graphs");
        s.nodes.insert(v);
        graphs.emplace(v, share(graph_from_json(g, where + ".graphs." + v)));
    }
    std::map<SkeletonEdge, NodeMap> typing;
    for (const auto& [key, map] : j.at("typing").items()) {
        SkeletonEdge e = parse_edge_key(key, where + ".typing");
        s.edges.insert(e);
        typing.emplace(e, node_map_from_json(map, where + ".typing." + key));
    }
    return make_hierarchy(s, graphs, typing);
}

Json rule_hierarchy_to_json(const RuleHierarchy& r) {
    Json j;
    j["rules"] = Json::object();
    j["homs"] = Json::object();
    for (const auto& [v, rule] : r.rules) j["rules"][v] = rule_to_json(rule);
    for (const auto& [e, f] : r.homs)
        j["homs"][edge_key(e)] = Json{{"lambda", node_map_to_json(f.lambda.node_map())},
                                      {"pi", node_map_to_json(f.pi.node_map())},
                                      {"rho", node_map_to_json(f.rho.node_map())}};
    return j;
}

RuleHierarchy rule_hierarchy_from_json(const Json& j, const std::string& where) {
    require_fields(j, where, {"rules", "homs"});
    require_object(j.at("rules"), where + ".rules");
    require_object(j.at("homs"), where + ".homs");
    Skeleton s;
    std::map<Vertex, Rule> rules;
    for (const auto& [v, rj] : j.at("rules").items()) {
        check_vertex(v, where + ".rules");
        s.nodes.insert(v);
        rules.emplace(v, rule_from_json(rj, where + ".rules." + v));
    }
    std::map<SkeletonEdge, RuleHomomorphism> homs;
    for (const auto& [key, fj] : j.at("homs").items()) {
        SkeletonEdge e = parse_edge_key(key, where + ".homs");
        std::string at = where + ".homs." + key;
        require_fields(fj, at, {"lambda", "pi", "rho"});
        if (!rules.contains(e.first) || !rules.contains(e.second))
            fail(ErrorCode::SchemaError, at + ": unknown rule");
        const Rule& rs = rules.at(e.first);
        const Rule& rt = rules.at(e.second);
        s.edges.insert(e);
        homs.emplace(e, RuleHomomorphism{
                            Homomorphism(rs.lhs_ptr(), rt.lhs_ptr(), node_map_from_json(fj.at("lambda"), at + ".lambda")),
                            Homomorphism(rs.p_ptr(), rt.p_ptr(), node_map_from_json(fj.at("pi"), at + ".pi")),
                            Homomorphism(rs.rhs_ptr(), rt.rhs_ptr(), node_map_from_json(fj.at("rho"), at + ".rho"))});
    }
    return make_rule_hierarchy(s, rules, homs);
}

Json instances_to_json(const InstanceAssignment& i) {
    Json j = Json::object();
    for (const auto& [v, m] : i) j[v] = node_map_to_json(m.node_map());
    return j;
}

InstanceAssignment instances_from_json(const Json& j, const RuleHierarchy& r, const Hierarchy& h,
                                       const std::string& where) {
    require_object(j, where);
    InstanceAssignment out;
    for (const auto& [v, mj] : j.items()) {
        if (!r.rules.contains(v) || !h.graphs.contains(v))
            fail(ErrorCode::SchemaError, where + "." + v + ": unknown node");
        out.emplace(v, instance_from_json(mj, r.rule(v).lhs_ptr(), h.graphs.at(v), where + "." + v));
    }
    return out;
}

}  // namespace sqpo
