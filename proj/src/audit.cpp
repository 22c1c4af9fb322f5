#include "sqpo/audit.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "sqpo/error.hpp"
#include "sqpo/matching.hpp"

namespace sqpo {
namespace {

NodeMap ids_of(const Graph& g) {
    NodeMap out;
    for (const auto& [id, _] : g.nodes) out.emplace(id, id);
    return out;
}

template <class M>
struct Ops;

template <>
struct Ops<ObjectModel> {
    using M = ObjectModel;

    static RewriteRecord apply_user(const GraphPtr& s, const Rule& r, const Homomorphism& m) {
        return apply_rule(s, r, retarget(m, s));
    }
    static Rule instantiate(const RewriteRecord& rec) {
        return rename_rule(rec.rule, rec.m.node_map(), {}, rec.m_plus.node_map());
    }
    static NodeMap identity_lhs(const Rule& r) { return ids_of(r.lhs()); }
    static RewriteRecord apply_inst(const GraphPtr& s, const Rule& r, const NodeMap& m) {
        return apply_rule(s, r, Homomorphism(r.lhs_ptr(), s, m), ids_of(r.rhs()));
    }
    static RewriteRecord revert_inst(const GraphPtr& s, const Rule& r, const NodeMap& rhs) {
        return apply_rule(s, reverse_rule(r), Homomorphism(r.rhs_ptr(), s, rhs), ids_of(r.lhs()));
    }
    static bool reversible(const RewriteRecord& rec) { return is_reversible(rec); }
    static GraphPtr result(const RewriteRecord& rec) { return rec.g_plus_ptr(); }
    static NodeMap rhs_map(const RewriteRecord& rec) { return rec.m_plus.node_map(); }
    static Rule reverse(const Rule& r) { return reverse_rule(r); }

    static Delta<M> reroot(const RewriteRecord& applied, const Delta<M>& d) {
        RewriteRecord back = revert(applied);
        RewriteRecord rd = apply_inst(back.g_plus_ptr(), d.rule, d.instance);
        Overlap o = compute_overlap(back, rd.m);
        CompositionTrace tr = compose_rules(back, o, rd);
        Rule rule = rename_rule(tr.composed, tr.m.node_map(), {}, tr.m_plus.node_map());
        return Delta<M>{rule, ids_of(rule.lhs())};
    }
    static Delta<M> empty_delta(const GraphPtr&) { return Delta<M>{empty_rule(), {}}; }

    struct MergeRules {
        Rule head_side;
        Rule branch_side;
    };
    static MergeRules canonical_merge(const Rule& r) {
        Pushout po = pushout(Span{r.r_minus, r.r_plus});
        return {Rule{Homomorphism::identity(r.lhs_ptr()), po.cospan.left},
                Rule{Homomorphism::identity(r.rhs_ptr()), po.cospan.right}};
    }
    static MergeRules spec_merge(const Rule& r, const ObjectMergeSpec& spec) {
        if (!spec.M) fail(ErrorCode::InvalidMergeSpec, "merge spec has no graph");
        Homomorphism plus(r.lhs_ptr(), spec.M, spec.r_plus_bar);
        Homomorphism minus(r.rhs_ptr(), spec.M, spec.r_minus_bar);
        for (const auto* f : {&plus, &minus}) {
            HomAnalysis a = analyze_homomorphism(*f);
            if (!a.valid)
                fail(ErrorCode::InvalidMergeSpec,
                     std::string(f == &plus ? "r_plus_bar: " : "r_minus_bar: ") + a.problems.front());
        }
        if (compose(r.r_minus, plus).node_map() != compose(r.r_plus, minus).node_map())
            fail(ErrorCode::InvalidMergeSpec, "r_plus_bar and r_minus_bar do not agree on P");
        return {Rule{Homomorphism::identity(r.lhs_ptr()), plus}, Rule{Homomorphism::identity(r.rhs_ptr()), minus}};
    }
    static bool iso(const GraphPtr& a, const GraphPtr& b) { return isomorphic(a, b); }
    static bool equal(const GraphPtr& a, const GraphPtr& b) { return same_graph(a, b); }

    static Json state_json(const GraphPtr& g) { return graph_to_json(*g); }
    static GraphPtr state_from(const Json& j) { return share(graph_from_json(j, "STATE")); }
    static Json rule_json(const Rule& r) { return rule_to_json(r); }
    static Rule rule_from(const Json& j, const std::string& where) { return rule_from_json(j, where); }
    static Json map_json(const NodeMap& m) { return node_map_to_json(m); }
    static NodeMap map_from(const Json& j, const std::string& where) { return node_map_from_json(j, where); }
    static void check_instance(const GraphPtr& s, const Rule& r, const NodeMap& m, const std::string& where) {
        HomAnalysis a = analyze_homomorphism(Homomorphism(r.lhs_ptr(), s, m));
        if (!a.valid || !a.mono) fail(ErrorCode::StoreCorrupt, where + ": instance does not fit the state");
    }
};

// Per-vertex renaming of a rule hierarchy; the rule homomorphisms are
// transported along the renamings.
RuleHierarchy rename_rule_hierarchy(const RuleHierarchy& r, const std::map<Vertex, NodeMap>& lhs_names,
                                    const std::map<Vertex, NodeMap>& rhs_names) {
    struct Isos {
        Homomorphism l, p, r;
    };
    std::map<Vertex, Isos> isos;
    std::map<Vertex, Rule> rules;
    for (const auto& [v, rule] : r.rules) {
        auto ln = lhs_names.find(v);
        auto rn = rhs_names.find(v);
        Isos i{relabel(rule.lhs_ptr(), ln == lhs_names.end() ? NodeMap{} : ln->second),
               Homomorphism::identity(rule.p_ptr()),
               relabel(rule.rhs_ptr(), rn == rhs_names.end() ? NodeMap{} : rn->second)};
        rules.emplace(v, Rule{compose(rule.r_minus, i.l), compose(rule.r_plus, i.r)});
        isos.emplace(v, std::move(i));
    }
    std::map<SkeletonEdge, RuleHomomorphism> homs;
    for (const auto& [e, f] : r.homs) {
        const Isos& s = isos.at(e.first);
        const Isos& t = isos.at(e.second);
        homs.emplace(e, RuleHomomorphism{compose(compose(inverse(s.l), f.lambda), t.l), f.pi,
                                         compose(compose(inverse(s.r), f.rho), t.r)});
    }
    return RuleHierarchy{r.skeleton, std::move(rules), std::move(homs)};
}

std::map<Vertex, NodeMap> maps_of(const InstanceAssignment& i) {
    std::map<Vertex, NodeMap> out;
    for (const auto& [v, m] : i) out.emplace(v, m.node_map());
    return out;
}

template <>
struct Ops<HierarchyModel> {
    using M = HierarchyModel;
    using Maps = std::map<Vertex, NodeMap>;

    static InstanceAssignment bind(const Hierarchy& h, const RuleHierarchy& r, const Maps& maps, bool lhs) {
        InstanceAssignment out;
        for (const auto& [v, rule] : r.rules) {
            auto it = maps.find(v);
            out.emplace(v, Homomorphism(lhs ? rule.lhs_ptr() : rule.rhs_ptr(), h.graphs.at(v),
                                        it == maps.end() ? NodeMap{} : it->second));
        }
        return out;
    }
    static Maps ids(const RuleHierarchy& r, bool lhs) {
        Maps out;
        for (const auto& [v, rule] : r.rules) out.emplace(v, ids_of(lhs ? rule.lhs() : rule.rhs()));
        return out;
    }

    static HierarchyRewriteRecord apply_user(const Hierarchy& s, const RuleHierarchy& r,
                                             const InstanceAssignment& i) {
        InstanceAssignment bound;
        for (const auto& [v, m] : i) {
            if (!s.graphs.contains(v)) fail(ErrorCode::NotApplicable, "instance for unknown node " + v);
            bound.emplace(v, retarget(m, s.graphs.at(v)));
        }
        return apply_rule_hierarchy(s, r, bound);
    }
    static RuleHierarchy instantiate(const HierarchyRewriteRecord& rec) {
        return rename_rule_hierarchy(rec.rules, maps_of(rec.instances()), maps_of(rec.rhs_instances()));
    }
    static Maps identity_lhs(const RuleHierarchy& r) { return ids(r, true); }
    static HierarchyRewriteRecord apply_inst(const Hierarchy& s, const RuleHierarchy& r, const Maps& m) {
        return apply_rule_hierarchy(s, r, bind(s, r, m, true), ids(r, false));
    }
    static HierarchyRewriteRecord revert_inst(const Hierarchy& s, const RuleHierarchy& r, const Maps& rhs) {
        return apply_rule_hierarchy(s, reverse_rule_hierarchy(r), bind(s, r, rhs, false), ids(r, true));
    }
    static bool reversible(const HierarchyRewriteRecord& rec) { return is_hierarchy_rewrite_reversible(rec); }
    static Hierarchy result(const HierarchyRewriteRecord& rec) { return rec.result; }
    static Maps rhs_map(const HierarchyRewriteRecord& rec) { return maps_of(rec.rhs_instances()); }
    static RuleHierarchy reverse(const RuleHierarchy& r) { return reverse_rule_hierarchy(r); }

    static Delta<M> reroot(const HierarchyRewriteRecord& applied, const Delta<M>& d) {
        HierarchyRewriteRecord back = revert_hierarchy(applied);
        HierarchyRewriteRecord rd = apply_inst(back.result, d.rule, d.instance);
        HierarchyOverlap o = hierarchy_overlap(back, rd.instances());
        HierarchyComposition c = compose_rule_hierarchies(back, o, rd);
        RuleHierarchy rule = rename_rule_hierarchy(c.rules, maps_of(c.instances), maps_of(c.rhs_instances));
        return Delta<M>{rule, ids(rule, true)};
    }
    static Delta<M> empty_delta(const Hierarchy& h) {
        RuleHierarchy r = empty_rule_hierarchy(h.skeleton);
        return Delta<M>{r, ids(r, true)};
    }

    struct MergeRules {
        RuleHierarchy head_side;
        RuleHierarchy branch_side;
    };
    static MergeRules build(const RuleHierarchy& r, const std::map<Vertex, Homomorphism>& plus,
                            const std::map<Vertex, Homomorphism>& minus,
                            const std::map<SkeletonEdge, Homomorphism>& between, ErrorCode code) {
        std::map<Vertex, Rule> hs, bs;
        for (const auto& [v, rule] : r.rules) {
            hs.emplace(v, Rule{Homomorphism::identity(rule.lhs_ptr()), plus.at(v)});
            bs.emplace(v, Rule{Homomorphism::identity(rule.rhs_ptr()), minus.at(v)});
        }
        std::map<SkeletonEdge, RuleHomomorphism> hh, bh;
        for (const auto& [e, f] : r.homs) {
            hh.emplace(e, RuleHomomorphism{f.lambda, f.lambda, between.at(e)});
            bh.emplace(e, RuleHomomorphism{f.rho, f.rho, between.at(e)});
        }
        try {
            return {make_rule_hierarchy(r.skeleton, hs, hh), make_rule_hierarchy(r.skeleton, bs, bh)};
        } catch (const Error& err) {
            if (err.code() == ErrorCode::RuleHomViolation) fail(code, std::string("merging rules: ") + err.what());
            throw;
        }
    }
    static MergeRules canonical_merge(const RuleHierarchy& r) {
        std::map<Vertex, Pushout> pos;
        std::map<Vertex, Homomorphism> plus, minus;
        for (const auto& [v, rule] : r.rules) {
            Pushout po = pushout(Span{rule.r_minus, rule.r_plus});
            plus.emplace(v, po.cospan.left);
            minus.emplace(v, po.cospan.right);
            pos.emplace(v, std::move(po));
        }
        std::map<SkeletonEdge, Homomorphism> between;
        for (const auto& [e, f] : r.homs) {
            const Pushout& t = pos.at(e.second);
            between.emplace(e, po_mediator(pos.at(e.first),
                                           Cospan{compose(f.lambda, t.cospan.left), compose(f.rho, t.cospan.right)}));
        }
        return build(r, plus, minus, between, ErrorCode::NotReversible);
    }
    static MergeRules spec_merge(const RuleHierarchy& r, const HierarchyMergeSpec& spec) {
        if (!(spec.M.skeleton == r.skeleton))
            fail(ErrorCode::InvalidMergeSpec, "merge spec hierarchy has a different skeleton");
        std::map<Vertex, Homomorphism> plus, minus;
        for (const auto& [v, rule] : r.rules) {
            auto p = spec.r_plus_bar.find(v);
            auto m = spec.r_minus_bar.find(v);
            if (p == spec.r_plus_bar.end() || m == spec.r_minus_bar.end())
                fail(ErrorCode::InvalidMergeSpec, "merge spec has no arrows for " + v);
            ObjectMergeSpec one{spec.M.graphs.at(v), p->second, m->second};
            auto rules = Ops<ObjectModel>::spec_merge(rule, one);
            plus.emplace(v, rules.head_side.r_plus);
            minus.emplace(v, rules.branch_side.r_plus);
        }
        return build(r, plus, minus, spec.M.homs, ErrorCode::InvalidMergeSpec);
    }
    static bool iso(const Hierarchy& a, const Hierarchy& b) {
        if (!(a.skeleton == b.skeleton)) return false;
        for (const auto& [v, g] : a.graphs)
            if (!isomorphic(g, b.graphs.at(v))) return false;
        return true;
    }
    static bool equal(const Hierarchy& a, const Hierarchy& b) { return a == b; }

    static Json state_json(const Hierarchy& h) { return hierarchy_to_json(h); }
    static Hierarchy state_from(const Json& j) { return hierarchy_from_json(j, "STATE"); }
    static Json rule_json(const RuleHierarchy& r) { return rule_hierarchy_to_json(r); }
    static RuleHierarchy rule_from(const Json& j, const std::string& where) {
        return rule_hierarchy_from_json(j, where);
    }
    static Json map_json(const Maps& m) {
        Json j = Json::object();
        for (const auto& [v, map] : m) j[v] = node_map_to_json(map);
        return j;
    }
    static Maps map_from(const Json& j, const std::string& where) {
        if (!j.is_object()) fail(ErrorCode::SchemaError, where + ": expected an object");
        Maps out;
        for (const auto& [v, mj] : j.items()) out.emplace(v, node_map_from_json(mj, where + "." + v));
        return out;
    }
    static void check_instance(const Hierarchy& s, const RuleHierarchy& r, const Maps& m, const std::string& where) {
        for (const auto& [v, rule] : r.rules) {
            if (!s.graphs.contains(v) || !m.contains(v))
                fail(ErrorCode::StoreCorrupt, where + ": instance does not fit the state");
            HomAnalysis a = analyze_homomorphism(Homomorphism(rule.lhs_ptr(), s.graphs.at(v), m.at(v)));
            if (!a.valid || !a.mono) fail(ErrorCode::StoreCorrupt, where + ": instance does not fit the state");
        }
    }
};

template <class M>
std::string commit_id(const std::optional<std::string>& parent, const Json& rule, const Json& rhs,
                      const std::string& message, const std::string& timestamp) {
    Json j;
    j["parent"] = parent ? Json(*parent) : Json(nullptr);
    j["rule"] = rule;
    j["rhs_instance"] = rhs;
    j["message"] = message;
    j["timestamp"] = timestamp;
    return sha256_hex(dump_canonical(j));
}

// Head moves along `rec`: append the commit and re-root every delta.
template <class M>
BasicTrail<M> advance(const BasicTrail<M>& t, const typename M::Record& rec0, const std::string& message,
                      const std::string& timestamp) {
    using O = Ops<M>;
    auto rule = O::instantiate(rec0);
    auto rec = O::apply_inst(t.head, rule, O::identity_lhs(rule));
    if (!O::reversible(rec)) fail(ErrorCode::NotReversible, "rewrite is not reversible");

    BasicTrail<M> out{O::result(rec), t.current_branch, t.lineages, {}};
    auto& lineage = out.lineages.at(t.current_branch);
    std::optional<std::string> parent;
    if (!lineage.empty()) parent = lineage.back().info.id;
    auto rhs = O::rhs_map(rec);
    std::string id = commit_id<M>(parent, O::rule_json(rule), O::map_json(rhs), message, timestamp);
    lineage.push_back(Commit<M>{CommitInfo{id, parent, message, timestamp}, rule, rhs});
    for (const auto& [b, d] : t.deltas) out.deltas.emplace(b, O::reroot(rec, d));
    return out;
}

template <class M>
const Delta<M>& delta_of(const BasicTrail<M>& t, const std::string& name) {
    if (name == t.current_branch) fail(ErrorCode::InvalidState, name + " is the current branch");
    auto it = t.deltas.find(name);
    if (it == t.deltas.end()) fail(ErrorCode::UnknownVersion, "no branch named " + name);
    return it->second;
}

template <class M, class Rules>
BasicTrail<M> merge_with(const BasicTrail<M>& t, const std::string& name, const Rules& rules,
                         const std::string& message, const std::string& timestamp) {
    using O = Ops<M>;
    const Delta<M>& d = delta_of(t, name);
    auto head_rec = O::apply_inst(t.head, rules.head_side, d.instance);
    auto branch_state = O::result(O::apply_inst(t.head, d.rule, d.instance));
    auto rhs = O::identity_lhs(rules.branch_side);
    auto branch_rec = O::apply_inst(branch_state, rules.branch_side, rhs);
    if (!O::iso(O::result(head_rec), O::result(branch_rec)))
        fail(ErrorCode::NotReversible, "merging " + name + " gives different results from the two sides");
    if (!O::reversible(head_rec)) fail(ErrorCode::NotReversible, "merge rewrite is not reversible");
    BasicTrail<M> rest = t;
    rest.deltas.erase(name);
    BasicTrail<M> out = advance(rest, head_rec, message, timestamp);
    out.lineages.erase(name);
    return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorCode::Io, "cannot write " + tmp.string());
        f << text << '\n';
        if (!f) fail(ErrorCode::Io, "cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) fail(ErrorCode::Io, "cannot write " + p.string() + ": " + ec.message());
}

Json read_doc(const std::filesystem::path& dir, const char* name) {
    std::ifstream f(dir / name, std::ios::binary);
    if (!f) fail(ErrorCode::StoreCorrupt, std::string(name) + ": missing or unreadable");
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::StoreCorrupt, std::string(name) + ": " + e.what());
    }
}

const char* kind_name(TrailKind k) { return k == TrailKind::Object ? "object" : "hierarchy"; }

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::Io, "sha256 failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return out.str();
}

template <class M>
std::vector<std::string> BasicTrail<M>::branches() const {
    std::vector<std::string> out;
    for (const auto& [b, _] : lineages) out.push_back(b);
    return out;
}

template <class M>
bool operator==(const BasicTrail<M>& a, const BasicTrail<M>& b) {
    return Ops<M>::equal(a.head, b.head) && a.current_branch == b.current_branch && a.lineages == b.lineages &&
           a.deltas == b.deltas;
}

template <class M>
BasicTrail<M> trail_init(const typename M::State& initial, const std::string& branch) {
    if (branch.empty()) fail(ErrorCode::InvalidState, "branch name is empty");
    if constexpr (M::kind == TrailKind::Object) {
        if (!initial) fail(ErrorCode::InvalidState, "no initial graph");
        auto problems = validate_graph(*initial);
        if (!problems.empty()) fail(ErrorCode::InvalidState, problems.front());
    } else {
        try {
            validate_hierarchy(initial);
        } catch (const Error& e) {
            fail(ErrorCode::InvalidState, e.what());
        }
    }
    BasicTrail<M> t{initial, branch, {}, {}};
    t.lineages[branch];
    return t;
}

template <class M>
BasicTrail<M> commit(const BasicTrail<M>& t, const typename M::RuleT& rule, const typename M::Instance& instance,
                     const std::string& message, const std::string& timestamp) {
    auto rec = Ops<M>::apply_user(t.head, rule, instance);
    if (!Ops<M>::reversible(rec)) fail(ErrorCode::NotReversible, "rewrite is not reversible");
    return advance(t, rec, message, timestamp);
}

template <class M>
std::vector<CommitInfo> log(const BasicTrail<M>& t) {
    std::vector<CommitInfo> out;
    for (const auto& c : t.commits()) out.push_back(c.info);
    return out;
}

template <class M>
BasicTrail<M> rollback(const BasicTrail<M>& t, std::size_t keep) {
    using O = Ops<M>;
    if (keep > t.commits().size())
        fail(ErrorCode::IndexOutOfRange, "cannot roll back to " + std::to_string(keep) + " of " +
                                             std::to_string(t.commits().size()) + " commits");
    BasicTrail<M> out = t;
    auto& lineage = out.lineages.at(out.current_branch);
    while (lineage.size() > keep) {
        const Commit<M>& c = lineage.back();
        auto rec = O::revert_inst(out.head, c.rule, c.rhs_instance);
        std::map<std::string, Delta<M>> deltas;
        for (const auto& [b, d] : out.deltas) deltas.emplace(b, O::reroot(rec, d));
        out.head = O::result(rec);
        out.deltas = std::move(deltas);
        lineage.pop_back();
    }
    return out;
}

template <class M>
BasicTrail<M> branch(const BasicTrail<M>& t, const std::string& name) {
    if (name.empty()) fail(ErrorCode::InvalidState, "branch name is empty");
    if (t.lineages.contains(name)) fail(ErrorCode::NameConflict, "branch " + name + " already exists");
    BasicTrail<M> out = t;
    out.lineages.emplace(name, t.commits());
    out.deltas.emplace(name, Ops<M>::empty_delta(t.head));
    return out;
}

template <class M>
BasicTrail<M> switch_branch(const BasicTrail<M>& t, const std::string& name) {
    using O = Ops<M>;
    const Delta<M>& d = delta_of(t, name);
    auto rec = O::apply_inst(t.head, d.rule, d.instance);
    if (!O::reversible(rec)) fail(ErrorCode::NotReversible, "delta to " + name + " is not reversible");
    BasicTrail<M> out{O::result(rec), name, t.lineages, {}};
    for (const auto& [b, db] : t.deltas)
        if (b != name) out.deltas.emplace(b, O::reroot(rec, db));
    out.deltas.emplace(t.current_branch, Delta<M>{O::reverse(d.rule), O::rhs_map(rec)});
    return out;
}

template <class M>
typename M::State materialize(const BasicTrail<M>& t, const std::string& name) {
    if (name == t.current_branch) return t.head;
    const Delta<M>& d = delta_of(t, name);
    return Ops<M>::result(Ops<M>::apply_inst(t.head, d.rule, d.instance));
}

template <class M>
std::pair<typename M::State, typename M::State> merge_faces(const BasicTrail<M>& t, const std::string& name) {
    using O = Ops<M>;
    const Delta<M>& d = delta_of(t, name);
    auto rules = O::canonical_merge(d.rule);
    auto head_side = O::result(O::apply_inst(t.head, rules.head_side, d.instance));
    auto branch_state = O::result(O::apply_inst(t.head, d.rule, d.instance));
    auto branch_side = O::result(O::apply_inst(branch_state, rules.branch_side, O::identity_lhs(rules.branch_side)));
    return {head_side, branch_side};
}

template <class M>
BasicTrail<M> merge_canonical(const BasicTrail<M>& t, const std::string& name, const std::string& message,
                              const std::string& timestamp) {
    return merge_with(t, name, Ops<M>::canonical_merge(delta_of(t, name).rule), message, timestamp);
}

template <class M>
BasicTrail<M> merge_with_spec(const BasicTrail<M>& t, const std::string& name, const MergeSpecOf<M>& spec,
                              const std::string& message, const std::string& timestamp) {
    return merge_with(t, name, Ops<M>::spec_merge(delta_of(t, name).rule, spec), message, timestamp);
}

template <class M>
void save_trail(const BasicTrail<M>& t, const std::filesystem::path& dir) {
    using O = Ops<M>;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

    Json commits = Json::array();
    std::set<std::string> seen;
    Json lineages = Json::object();
    for (const auto& [b, lineage] : t.lineages) {
        Json ids = Json::array();
        for (const auto& c : lineage) {
            ids.push_back(c.info.id);
            if (!seen.insert(c.info.id).second) continue;
            Json cj;
            cj["id"] = c.info.id;
            cj["parent"] = c.info.parent ? Json(*c.info.parent) : Json(nullptr);
            cj["message"] = c.info.message;
            cj["timestamp"] = c.info.timestamp;
            cj["rule"] = O::rule_json(c.rule);
            cj["rhs_instance"] = O::map_json(c.rhs_instance);
            commits.push_back(std::move(cj));
        }
        lineages[b] = std::move(ids);
    }
    Json trail;
    trail["kind"] = kind_name(M::kind);
    trail["commits"] = std::move(commits);
    trail["lineages"] = std::move(lineages);

    Json deltas = Json::object();
    for (const auto& [b, d] : t.deltas) deltas[b] = Json{{"rule", O::rule_json(d.rule)}, {"instance", O::map_json(d.instance)}};

    write_file(dir / "FORMAT", dump_canonical(Json(kTrailFormat)));
    write_file(dir / "STATE", dump_canonical(O::state_json(t.head)));
    write_file(dir / "TRAIL", dump_canonical(trail));
    write_file(dir / "DELTAS", dump_canonical(deltas));
    write_file(dir / "HEAD", dump_canonical(Json(t.current_branch)));
}

TrailKind store_kind(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) fail(ErrorCode::Io, "no store at " + dir.string());
    Json format = read_doc(dir, "FORMAT");
    if (!format.is_string()) fail(ErrorCode::StoreCorrupt, "FORMAT: expected a string");
    if (format.get<std::string>() != kTrailFormat)
        fail(ErrorCode::VersionMismatch, "store format " + format.get<std::string>() + ", expected " + kTrailFormat);
    Json trail = read_doc(dir, "TRAIL");
    if (!trail.is_object() || !trail.contains("kind") || !trail.at("kind").is_string())
        fail(ErrorCode::StoreCorrupt, "TRAIL: missing kind");
    std::string k = trail.at("kind").get<std::string>();
    if (k == "object") return TrailKind::Object;
    if (k == "hierarchy") return TrailKind::Hierarchy;
    fail(ErrorCode::StoreCorrupt, "TRAIL: unknown kind " + k);
}

template <class M>
BasicTrail<M> load_trail(const std::filesystem::path& dir) {
    using O = Ops<M>;
    if (store_kind(dir) != M::kind)
        fail(ErrorCode::StoreCorrupt, std::string("TRAIL: store does not hold a ") + kind_name(M::kind) + " trail");
    auto corrupt = [](const char* file, const Error& e) -> Error {
        return Error(ErrorCode::StoreCorrupt, std::string(file) + ": " + e.what());
    };
    BasicTrail<M> t{};
    try {
        t.head = O::state_from(read_doc(dir, "STATE"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StoreCorrupt) throw;
        throw corrupt("STATE", e);
    }
    Json head = read_doc(dir, "HEAD");
    if (!head.is_string()) fail(ErrorCode::StoreCorrupt, "HEAD: expected a branch name");
    t.current_branch = head.get<std::string>();

    try {
        Json trail = read_doc(dir, "TRAIL");
        std::map<std::string, Commit<M>> by_id;
        for (const auto& cj : trail.at("commits")) {
            CommitInfo info;
            info.id = cj.at("id").get<std::string>();
            if (!cj.at("parent").is_null()) info.parent = cj.at("parent").get<std::string>();
            info.message = cj.at("message").get<std::string>();
            info.timestamp = cj.at("timestamp").get<std::string>();
            Commit<M> c{info, O::rule_from(cj.at("rule"), "TRAIL.rule"),
                        O::map_from(cj.at("rhs_instance"), "TRAIL.rhs_instance")};
            std::string id = commit_id<M>(c.info.parent, O::rule_json(c.rule), O::map_json(c.rhs_instance),
                                          c.info.message, c.info.timestamp);
            if (id != c.info.id) fail(ErrorCode::StoreCorrupt, "TRAIL: commit " + c.info.id + " does not match its content");
            by_id.emplace(c.info.id, std::move(c));
        }
        for (const auto& [b, ids] : trail.at("lineages").items()) {
            auto& lineage = t.lineages[b];
            for (const Json& idj : ids) {
                std::string id = idj;
                auto it = by_id.find(id);
                if (it == by_id.end()) fail(ErrorCode::StoreCorrupt, "TRAIL: unknown commit " + id);
                lineage.push_back(it->second);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::StoreCorrupt, std::string("TRAIL: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StoreCorrupt) throw;
        throw corrupt("TRAIL", e);
    }
    if (!t.lineages.contains(t.current_branch))
        fail(ErrorCode::StoreCorrupt, "HEAD: unknown branch " + t.current_branch);

    try {
        Json deltas = read_doc(dir, "DELTAS");
        if (!deltas.is_object()) fail(ErrorCode::StoreCorrupt, "DELTAS: expected an object");
        for (const auto& [b, dj] : deltas.items()) {
            Delta<M> d{O::rule_from(dj.at("rule"), "DELTAS." + b + ".rule"),
                       O::map_from(dj.at("instance"), "DELTAS." + b + ".instance")};
            O::check_instance(t.head, d.rule, d.instance, "DELTAS." + b);
            t.deltas.emplace(b, std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::StoreCorrupt, std::string("DELTAS: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StoreCorrupt) throw;
        throw corrupt("DELTAS", e);
    }
    for (const auto& [b, _] : t.lineages)
        if (b != t.current_branch && !t.deltas.contains(b)) fail(ErrorCode::StoreCorrupt, "DELTAS: no delta for " + b);
    if (t.deltas.size() + 1 != t.lineages.size()) fail(ErrorCode::StoreCorrupt, "DELTAS: deltas and branches differ");
    return t;
}

StoreLock::StoreLock(const std::filesystem::path& dir) {
    fd_ = ::open((dir / "LOCK").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) fail(ErrorCode::Io, "cannot open lock file in " + dir.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        fail(ErrorCode::StoreLocked, "store " + dir.string() + " is locked by another writer");
    }
}

StoreLock::~StoreLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

#define SQPO_INSTANTIATE(M)                                                                                     \
    template struct BasicTrail<M>;                                                                              \
    template bool operator==(const BasicTrail<M>&, const BasicTrail<M>&);                                       \
    template BasicTrail<M> trail_init<M>(const M::State&, const std::string&);                                  \
    template BasicTrail<M> commit<M>(const BasicTrail<M>&, const M::RuleT&, const M::Instance&,                 \
                                     const std::string&, const std::string&);                                   \
    template std::vector<CommitInfo> log<M>(const BasicTrail<M>&);                                              \
    template BasicTrail<M> rollback<M>(const BasicTrail<M>&, std::size_t);                                      \
    template BasicTrail<M> branch<M>(const BasicTrail<M>&, const std::string&);                                 \
    template BasicTrail<M> switch_branch<M>(const BasicTrail<M>&, const std::string&);                          \
    template M::State materialize<M>(const BasicTrail<M>&, const std::string&);                                 \
    template std::pair<M::State, M::State> merge_faces<M>(const BasicTrail<M>&, const std::string&);            \
    template BasicTrail<M> merge_canonical<M>(const BasicTrail<M>&, const std::string&, const std::string&,     \
                                              const std::string&);                                              \
    template BasicTrail<M> merge_with_spec<M>(const BasicTrail<M>&, const std::string&, const MergeSpecOf<M>&,  \
                                              const std::string&, const std::string&);                          \
    template void save_trail<M>(const BasicTrail<M>&, const std::filesystem::path&);                            \
    template BasicTrail<M> load_trail<M>(const std::filesystem::path&);

SQPO_INSTANTIATE(ObjectModel)
SQPO_INSTANTIATE(HierarchyModel)

}  // namespace sqpo
