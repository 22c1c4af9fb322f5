#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sqpo/hierarchy.hpp"

namespace sqpo {

using Json = nlohmann::json;

// Canonical graph document:
//   {"nodes": {"<id>": {"<key>": [v, ...]}}, "edges": {"<src>|<tgt>": {...}}}
// Object keys are sorted (nlohmann::json stores objects in std::map) and
// value arrays are sorted by Value ordering.

Json attrs_to_json(const AttrSet& attrs);
AttrSet attrs_from_json(const Json& j, const std::string& where);

Json graph_to_json(const Graph& g);
/// Throws SchemaError naming the offending field.
Graph graph_from_json(const Json& j, const std::string& where = "graph");

Json node_map_to_json(const NodeMap& map);
NodeMap node_map_from_json(const Json& j, const std::string& where);

// Rule document: {"lhs", "p", "rhs": <graph>, "p_lhs", "p_rhs": {<pid>: <id>}}.
Json rule_to_json(const Rule& r);
Rule rule_from_json(const Json& j, const std::string& where = "rule");

/// Instance document {"<pattern-id>": "<host-id>"}, validated as a mono.
Homomorphism instance_from_json(const Json& j, const GraphPtr& pattern, const GraphPtr& host,
                                const std::string& where = "instance");

// Hierarchy document: {"graphs": {v: <graph>}, "typing": {"s->t": {<sid>: <tid>}}}.
Json hierarchy_to_json(const Hierarchy& h);
Hierarchy hierarchy_from_json(const Json& j, const std::string& where = "hierarchy");

// Rule hierarchy document: {"rules": {v: <rule>},
//   "homs": {"s->t": {"lambda": map, "pi": map, "rho": map}}}.
Json rule_hierarchy_to_json(const RuleHierarchy& r);
RuleHierarchy rule_hierarchy_from_json(const Json& j, const std::string& where = "rule_hierarchy");

Json instances_to_json(const InstanceAssignment& i);
InstanceAssignment instances_from_json(const Json& j, const RuleHierarchy& r, const Hierarchy& h,
                                       const std::string& where = "instances");

/// Compact canonical text; equal graphs encode to identical strings.
std::string encode_graph(const Graph& g);
/// Throws ParseError (with byte position) or SchemaError.
Graph decode_graph(std::string_view text);

/// Parses JSON text, mapping syntax errors to ParseError.
Json parse_json(std::string_view text, const std::string& what);

/// Canonical compact dump used for every persisted document.
std::string dump_canonical(const Json& j);

}  // namespace sqpo
