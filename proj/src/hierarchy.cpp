#include "sqpo/hierarchy.hpp"

#include <deque>
#include <functional>
#include <optional>

#include "sqpo/error.hpp"

namespace sqpo {
namespace {

std::string edge_name(const SkeletonEdge& e) { return e.first + "->" + e.second; }

std::string path_name(const std::vector<Vertex>& path) {
    std::string out;
    for (const auto& v : path) out += (out.empty() ? "" : "->") + v;
    return out;
}

// Every path between every pair of vertices must give the same composite.
// `compose_fn` extends a composite by one edge; `equal_fn` compares two.
template <class Arrow>
void check_paths(const Skeleton& s, const std::map<SkeletonEdge, Arrow>& arrows,
                 const std::function<Arrow(const Arrow&, const Arrow&)>& compose_fn,
                 const std::function<bool(const Arrow&, const Arrow&)>& equal_fn,
                 ErrorCode code) {
    for (const auto& start : s.nodes) {
        std::map<Vertex, std::pair<Arrow, std::vector<Vertex>>> seen;
        std::function<void(const Vertex&, const Arrow*, std::vector<Vertex>&)> walk =
            [&](const Vertex& v, const Arrow* acc, std::vector<Vertex>& path) {
                for (const auto& w : s.successors(v)) {
                    const Arrow& step = arrows.at({v, w});
                    Arrow next = acc ? compose_fn(*acc, step) : step;
                    path.push_back(w);
                    auto it = seen.find(w);
                    if (it == seen.end()) {
                        seen.emplace(w, std::make_pair(next, path));
                    } else if (!equal_fn(it->second.first, next)) {
                        fail(code, "paths " + path_name(it->second.second) + " and " + path_name(path) +
                                       " between " + start + " and " + w + " differ");
                    }
                    walk(w, &next, path);
                    path.pop_back();
                }
            };
        std::vector<Vertex> path{start};
        walk(start, nullptr, path);
    }
}

bool same_map(const Homomorphism& a, const Homomorphism& b) { return a.node_map() == b.node_map(); }

// Node maps of a∘r and b∘s agree, i.e. the square with legs r,a and s,b commutes.
bool agree(const Homomorphism& first1, const Homomorphism& then1, const Homomorphism& first2,
           const Homomorphism& then2) {
    for (const auto& [x, y] : first1.node_map()) {
        auto i = then1.node_map().find(y);
        auto j = first2.node_map().find(x);
        if (i == then1.node_map().end() || j == first2.node_map().end()) return false;
        auto k = then2.node_map().find(j->second);
        if (k == then2.node_map().end() || k->second != i->second) return false;
    }
    return true;
}

std::vector<std::string> instance_problems(const Skeleton& s, const RuleHierarchy& r,
                                           const std::map<Vertex, GraphPtr>& graphs,
                                           const InstanceAssignment& i) {
    std::vector<std::string> out;
    if (!(s == r.skeleton)) {
        out.push_back("rule hierarchy and hierarchy have different skeletons");
        return out;
    }
    for (const auto& v : s.nodes) {
        auto it = i.find(v);
        if (it == i.end()) {
            out.push_back(v + ": no instance");
            continue;
        }
        const Homomorphism& m = it->second;
        if (!same_graph(m.source_ptr(), r.rule(v).lhs_ptr()))
            out.push_back(v + ": instance source is not the rule's left-hand side");
        else if (!same_graph(m.target_ptr(), graphs.at(v)))
            out.push_back(v + ": instance target is not the graph");
        else {
            HomAnalysis a = analyze_homomorphism(m);
            if (!a.valid) out.push_back(v + ": instance: " + a.problems.front());
            else if (!a.mono) out.push_back(v + ": instance is not injective");
        }
    }
    return out;
}

// Construction of the unique G_s⁻ → G_t⁻ over h and π (see check_applicability).
std::optional<Homomorphism> restrictive_arrow(const Homomorphism& ms, const Homomorphism& gs,
                                              const Homomorphism& mt, const Homomorphism& gt,
                                              const Homomorphism& h, const Homomorphism& pi,
                                              std::string& why) {
    std::map<NodeId, NodeId> p_of;
    for (const auto& [p, z] : ms.node_map()) p_of.emplace(z, p);
    std::map<NodeId, std::vector<NodeId>> over;
    for (const auto& [w, n] : gt.node_map()) over[n].push_back(w);
    NodeMap out;
    for (const auto& [z, _] : gs.source().nodes) {
        auto pit = p_of.find(z);
        if (pit != p_of.end()) {
            out.emplace(z, mt(pi(pit->second)));
            continue;
        }
        const NodeId& n = gs(z);
        auto cit = over.find(h(n));
        std::size_t k = cit == over.end() ? 0 : cit->second.size();
        if (k != 1) {
            why = "node " + n + " is typed by " + h(n) + ", which has " + std::to_string(k) +
                  " counterparts after the restrictive phase";
            return std::nullopt;
        }
        out.emplace(z, cit->second.front());
    }
    Homomorphism a(gs.source_ptr(), gt.source_ptr(), std::move(out));
    HomAnalysis an = analyze_homomorphism(a);
    if (!an.valid) {
        why = an.problems.front();
        return std::nullopt;
    }
    if (!agree(a, gt, gs, h) || !agree(ms, a, pi, mt)) {
        why = "restrictive faces do not commute";
        return std::nullopt;
    }
    return a;
}

struct Restrictive {
    Homomorphism m_minus;
    Homomorphism g_minus;
};

Applicability assess(const Hierarchy& h, const RuleHierarchy& r, const InstanceAssignment& i,
                     const std::map<Vertex, Restrictive>& fps) {
    Applicability out;
    for (const auto& e : h.skeleton.edges) {
        const auto& [s, t] = e;
        const RuleHomomorphism& f = r.homs.at(e);
        const Homomorphism& hst = h.homs.at(e);
        if (!agree(i.at(s), hst, f.lambda, i.at(t))) {
            out.failures.push_back(edge_name(e) + ": instances do not commute with the typing");
            continue;
        }
        std::string why;
        auto a = restrictive_arrow(fps.at(s).m_minus, fps.at(s).g_minus, fps.at(t).m_minus,
                                   fps.at(t).g_minus, hst, f.pi, why);
        if (!a) {
            out.failures.push_back(edge_name(e) + ": " + why);
            continue;
        }
        out.homs_minus.emplace(e, *a);
    }
    out.applicable = out.failures.empty();
    return out;
}

Error rethrow_as(const Error& e, ErrorCode code, const std::string& what) {
    return Error(code, what + ": " + e.what());
}

}  // namespace

std::vector<Vertex> Skeleton::successors(const Vertex& v) const {
    std::vector<Vertex> out;
    for (auto it = edges.lower_bound({v, std::string()}); it != edges.end() && it->first == v; ++it)
        out.push_back(it->second);
    return out;
}

std::vector<Vertex> Skeleton::predecessors(const Vertex& v) const {
    std::vector<Vertex> out;
    for (const auto& [a, b] : edges)
        if (b == v) out.push_back(a);
    return out;
}

std::vector<Vertex> Skeleton::topological_order() const {
    std::map<Vertex, int> indeg;
    for (const auto& v : nodes) indeg[v] = 0;
    for (const auto& [a, b] : edges) ++indeg[b];
    std::deque<Vertex> ready;
    for (const auto& [v, d] : indeg)
        if (d == 0) ready.push_back(v);
    std::vector<Vertex> out;
    while (!ready.empty()) {
        Vertex v = ready.front();
        ready.pop_front();
        out.push_back(v);
        for (const auto& w : successors(v))
            if (--indeg[w] == 0) ready.push_back(w);
    }
    if (out.size() != nodes.size()) fail(ErrorCode::CycleDetected, "skeleton has a cycle");
    return out;
}

std::set<Vertex> Skeleton::ancestors(const Vertex& v) const {
    std::set<Vertex> out;
    std::deque<Vertex> todo{v};
    while (!todo.empty()) {
        Vertex x = todo.front();
        todo.pop_front();
        for (const auto& p : predecessors(x))
            if (out.insert(p).second) todo.push_back(p);
    }
    return out;
}

std::set<Vertex> Skeleton::descendants(const Vertex& v) const {
    std::set<Vertex> out;
    std::deque<Vertex> todo{v};
    while (!todo.empty()) {
        Vertex x = todo.front();
        todo.pop_front();
        for (const auto& p : successors(x))
            if (out.insert(p).second) todo.push_back(p);
    }
    return out;
}

void validate_skeleton(const Skeleton& s) {
    for (const auto& [a, b] : s.edges) {
        if (!s.nodes.contains(a) || !s.nodes.contains(b))
            fail(ErrorCode::DomainMismatch, "skeleton edge " + a + "->" + b + " uses an unknown node");
        if (a == b) fail(ErrorCode::CycleDetected, "skeleton has a self-loop on " + a);
    }
    s.topological_order();
}

Homomorphism Hierarchy::path_hom(const Vertex& s, const Vertex& t) const {
    if (s == t) return Homomorphism::identity(graphs.at(s));
    std::map<Vertex, Vertex> parent;
    std::deque<Vertex> todo{s};
    while (!todo.empty() && !parent.contains(t)) {
        Vertex x = todo.front();
        todo.pop_front();
        for (const auto& w : skeleton.successors(x))
            if (!parent.contains(w)) {
                parent.emplace(w, x);
                todo.push_back(w);
            }
    }
    if (!parent.contains(t)) fail(ErrorCode::DomainMismatch, "no path from " + s + " to " + t);
    std::vector<Vertex> path{t};
    while (path.back() != s) path.push_back(parent.at(path.back()));
    Homomorphism out = Homomorphism::identity(graphs.at(s));
    for (std::size_t k = path.size() - 1; k > 0; --k) out = compose(out, homs.at({path[k], path[k - 1]}));
    return out;
}

bool operator==(const Hierarchy& a, const Hierarchy& b) {
    if (!(a.skeleton == b.skeleton) || a.graphs.size() != b.graphs.size()) return false;
    for (const auto& [v, g] : a.graphs) {
        auto it = b.graphs.find(v);
        if (it == b.graphs.end() || !same_graph(g, it->second)) return false;
    }
    return a.homs == b.homs;
}

void validate_hierarchy(const Hierarchy& h) {
    validate_skeleton(h.skeleton);
    for (const auto& v : h.skeleton.nodes) {
        auto it = h.graphs.find(v);
        if (it == h.graphs.end() || !it->second) fail(ErrorCode::DomainMismatch, "no graph for " + v);
        auto problems = validate_graph(*it->second);
        if (!problems.empty()) fail(ErrorCode::InvalidGraph, v + ": " + problems.front());
    }
    if (h.graphs.size() != h.skeleton.nodes.size())
        fail(ErrorCode::DomainMismatch, "graphs given for nodes outside the skeleton");
    if (h.homs.size() != h.skeleton.edges.size())
        fail(ErrorCode::DomainMismatch, "typing given for edges outside the skeleton");
    for (const auto& e : h.skeleton.edges) {
        auto it = h.homs.find(e);
        if (it == h.homs.end()) fail(ErrorCode::DomainMismatch, "no typing for " + edge_name(e));
        if (!same_graph(it->second.source_ptr(), h.graphs.at(e.first)) ||
            !same_graph(it->second.target_ptr(), h.graphs.at(e.second)))
            fail(ErrorCode::DomainMismatch, "typing " + edge_name(e) + " has wrong endpoints");
        require_valid(it->second, "typing " + edge_name(e));
    }
    check_paths<Homomorphism>(
        h.skeleton, h.homs, [](const Homomorphism& a, const Homomorphism& b) { return compose(a, b); },
        same_map, ErrorCode::CommutativityViolation);
}

Hierarchy make_hierarchy(const Skeleton& skeleton, const std::map<Vertex, GraphPtr>& graphs,
                         const std::map<SkeletonEdge, NodeMap>& typing) {
    validate_skeleton(skeleton);
    Hierarchy h{skeleton, graphs, {}};
    for (const auto& [e, map] : typing) {
        if (!skeleton.edges.contains(e))
            fail(ErrorCode::DomainMismatch, "typing for " + edge_name(e) + " which is not a skeleton edge");
        if (!graphs.contains(e.first) || !graphs.contains(e.second))
            fail(ErrorCode::DomainMismatch, "no graph for an endpoint of " + edge_name(e));
        h.homs.emplace(e, Homomorphism(graphs.at(e.first), graphs.at(e.second), map));
    }
    validate_hierarchy(h);
    return h;
}

RuleHomomorphism compose(const RuleHomomorphism& f, const RuleHomomorphism& g) {
    return RuleHomomorphism{compose(f.lambda, g.lambda), compose(f.pi, g.pi), compose(f.rho, g.rho)};
}

RuleHierarchy make_rule_hierarchy(const Skeleton& skeleton, const std::map<Vertex, Rule>& rules,
                                  const std::map<SkeletonEdge, RuleHomomorphism>& homs) {
    validate_skeleton(skeleton);
    for (const auto& v : skeleton.nodes)
        if (!rules.contains(v)) fail(ErrorCode::RuleHomViolation, "no rule for " + v);
    if (rules.size() != skeleton.nodes.size())
        fail(ErrorCode::RuleHomViolation, "rules given for nodes outside the skeleton");
    if (homs.size() != skeleton.edges.size())
        fail(ErrorCode::RuleHomViolation, "rule homomorphisms given for edges outside the skeleton");
    for (const auto& e : skeleton.edges) {
        auto it = homs.find(e);
        if (it == homs.end()) fail(ErrorCode::RuleHomViolation, "no rule homomorphism for " + edge_name(e));
        const RuleHomomorphism& f = it->second;
        const Rule& rs = rules.at(e.first);
        const Rule& rt = rules.at(e.second);
        auto check = [&](const Homomorphism& a, const GraphPtr& src, const GraphPtr& dst, const char* name) {
            if (!same_graph(a.source_ptr(), src) || !same_graph(a.target_ptr(), dst))
                fail(ErrorCode::RuleHomViolation, edge_name(e) + ": " + name + " has wrong endpoints");
            HomAnalysis an = analyze_homomorphism(a);
            if (!an.valid)
                fail(ErrorCode::RuleHomViolation, edge_name(e) + ": " + name + ": " + an.problems.front());
        };
        check(f.lambda, rs.lhs_ptr(), rt.lhs_ptr(), "lambda");
        check(f.pi, rs.p_ptr(), rt.p_ptr(), "pi");
        check(f.rho, rs.rhs_ptr(), rt.rhs_ptr(), "rho");
        if (!agree(rs.r_minus, f.lambda, f.pi, rt.r_minus))
            fail(ErrorCode::RuleHomViolation, edge_name(e) + ": left square does not commute");
        if (!agree(rs.r_plus, f.rho, f.pi, rt.r_plus))
            fail(ErrorCode::RuleHomViolation, edge_name(e) + ": right square does not commute");
    }
    check_paths<RuleHomomorphism>(
        skeleton, homs,
        [](const RuleHomomorphism& a, const RuleHomomorphism& b) { return compose(a, b); },
        [](const RuleHomomorphism& a, const RuleHomomorphism& b) {
            return same_map(a.lambda, b.lambda) && same_map(a.pi, b.pi) && same_map(a.rho, b.rho);
        },
        ErrorCode::RuleHomViolation);
    return RuleHierarchy{skeleton, rules, homs};
}

RuleHierarchy empty_rule_hierarchy(const Skeleton& skeleton) {
    std::map<Vertex, Rule> rules;
    for (const auto& v : skeleton.nodes) rules.emplace(v, empty_rule());
    std::map<SkeletonEdge, RuleHomomorphism> homs;
    for (const auto& e : skeleton.edges) {
        Homomorphism z(rules.at(e.first).lhs_ptr(), rules.at(e.second).lhs_ptr(), {});
        homs.emplace(e, RuleHomomorphism{z, z, z});
    }
    return make_rule_hierarchy(skeleton, rules, homs);
}

Applicability check_applicability(const Hierarchy& h, const RuleHierarchy& r,
                                  const InstanceAssignment& i) {
    Applicability out;
    out.failures = instance_problems(h.skeleton, r, h.graphs, i);
    if (!out.failures.empty()) return out;
    std::map<Vertex, Restrictive> fps;
    for (const auto& v : h.skeleton.nodes) {
        PullbackComplement fp = final_pbc(r.rule(v).r_minus, i.at(v));
        fps.emplace(v, Restrictive{fp.m_minus, fp.g_minus});
    }
    return assess(h, r, i, fps);
}

InstanceAssignment HierarchyRewriteRecord::instances() const {
    InstanceAssignment out;
    for (const auto& [v, rec] : records) out.emplace(v, rec.m);
    return out;
}

InstanceAssignment HierarchyRewriteRecord::rhs_instances() const {
    InstanceAssignment out;
    for (const auto& [v, rec] : records) out.emplace(v, rec.m_plus);
    return out;
}

HierarchyRewriteRecord apply_rule_hierarchy(const Hierarchy& h, const RuleHierarchy& r,
                                            const InstanceAssignment& i,
                                            const NameAssignment& rhs_names) {
    auto problems = instance_problems(h.skeleton, r, h.graphs, i);
    if (!problems.empty()) fail(ErrorCode::NotApplicable, problems.front());

    HierarchyRewriteRecord out{h, r, {}, {}, {}, {}};
    std::map<Vertex, Restrictive> fps;
    for (const auto& v : h.skeleton.nodes) {
        auto nit = rhs_names.find(v);
        RewriteRecord rec = apply_rule(h.graphs.at(v), r.rule(v), i.at(v),
                                       nit == rhs_names.end() ? NodeMap{} : nit->second);
        fps.emplace(v, Restrictive{rec.m_minus, rec.g_arrow_minus});
        out.records.emplace(v, std::move(rec));
    }
    Applicability a = assess(h, r, i, fps);
    if (!a.applicable) fail(ErrorCode::NotApplicable, a.failures.front());
    out.homs_minus = a.homs_minus;

    Hierarchy result{h.skeleton, {}, {}};
    for (const auto& [v, rec] : out.records) result.graphs.emplace(v, rec.g_plus_ptr());
    for (const auto& e : h.skeleton.edges) {
        const RewriteRecord& rs = out.records.at(e.first);
        const RewriteRecord& rt = out.records.at(e.second);
        Pushout gs{Span{rs.m_minus, rs.rule.r_plus}, Cospan{rs.g_arrow_plus, rs.m_plus}};
        Homomorphism hp = po_mediator(gs, Cospan{compose(a.homs_minus.at(e), rt.g_arrow_plus),
                                                 compose(r.homs.at(e).rho, rt.m_plus)});
        out.homs_plus.emplace(e, hp);
        result.homs.emplace(e, hp);
    }
    validate_hierarchy(result);
    out.result = std::move(result);
    return out;
}

RuleHierarchy reverse_rule_hierarchy(const RuleHierarchy& r) {
    RuleHierarchy out{r.skeleton, {}, {}};
    for (const auto& [v, rule] : r.rules) out.rules.emplace(v, reverse_rule(rule));
    for (const auto& [e, f] : r.homs) out.homs.emplace(e, RuleHomomorphism{f.rho, f.pi, f.lambda});
    return out;
}

bool is_hierarchy_rewrite_reversible(const HierarchyRewriteRecord& rec) {
    for (const auto& [_, r] : rec.records)
        if (!is_reversible(r)) return false;
    return check_applicability(rec.result, reverse_rule_hierarchy(rec.rules), rec.rhs_instances()).applicable;
}

HierarchyRewriteRecord revert_hierarchy(const HierarchyRewriteRecord& rec) {
    if (!is_hierarchy_rewrite_reversible(rec))
        fail(ErrorCode::NotReversible, "hierarchy rewrite is not reversible");
    NameAssignment names;
    for (const auto& [v, r] : rec.records) names.emplace(v, r.m.node_map());
    return apply_rule_hierarchy(rec.result, reverse_rule_hierarchy(rec.rules), rec.rhs_instances(), names);
}

LiftingResult lifting_rule(const Homomorphism& h, const RewriteRecord& rec) {
    if (!same_graph(h.target_ptr(), rec.g_ptr()))
        fail(ErrorCode::DomainMismatch, "lifting: typing does not target the rewritten graph");
    require_valid(h, "lifting typing");
    Pullback hm = pullback(Cospan{h, rec.g_arrow_minus});
    Pullback lh = pullback(Cospan{h, rec.m});
    Pullback ph = pullback(Cospan{hm.span.right, rec.m_minus});
    Homomorphism r_hat = pb_mediator(lh, Span{compose(ph.span.left, hm.span.left),
                                              compose(ph.span.right, rec.rule.r_minus)});
    Rule rule{r_hat, Homomorphism::identity(ph.apex_ptr())};
    RuleHomomorphism up{lh.span.right, ph.span.right, compose(ph.span.right, rec.rule.r_plus)};
    return LiftingResult{rule, lh.span.left, up, hm, ph.span.left};
}

ProjectionResult projection_rule(const Homomorphism& h, const RewriteRecord& rec) {
    if (!same_graph(h.source_ptr(), rec.g_ptr()))
        fail(ErrorCode::DomainMismatch, "projection: typing does not start at the rewritten graph");
    require_valid(h, "projection typing");
    Pushout tp = pushout(Span{compose(rec.g_arrow_minus, h), rec.g_arrow_plus});
    const Homomorphism& t_plus = tp.cospan.left;
    const Homomorphism& h_plus = tp.cospan.right;
    // P_T covers the whole image of L, so that deleted nodes still have a type.
    ImageFactorization img = image_factorization(compose(rec.m, h));
    const Graph& PT = img.mono.source();

    Graph RT;
    auto add = [&](const Graph& src, const Homomorphism& f) {
        for (const auto& [x, attrs] : src.nodes) RT.nodes[f(x)] = unite(RT.nodes[f(x)], attrs);
        for (const auto& [key, attrs] : src.edges) {
            EdgeKey k{f(key.first), f(key.second)};
            RT.edges[k] = unite(RT.edges[k], attrs);
        }
    };
    Homomorphism pt_in = compose(img.mono, t_plus);
    Homomorphism r_in = compose(rec.m_plus, h_plus);
    add(PT, pt_in);
    add(rec.rule.rhs(), r_in);
    NodeMap incl;
    for (const auto& [x, _] : RT.nodes) incl.emplace(x, x);
    GraphPtr rt = share(std::move(RT));

    Homomorphism r_hat(img.mono.source_ptr(), rt, pt_in.node_map());
    Rule rule{Homomorphism::identity(img.mono.source_ptr()), r_hat};
    RuleHomomorphism down{img.epi, compose(rec.rule.r_minus, img.epi),
                          Homomorphism(rec.rule.rhs_ptr(), rt, r_in.node_map())};
    return ProjectionResult{rule, img.mono, down, tp, Homomorphism(rt, tp.apex_ptr(), std::move(incl))};
}

Homomorphism image_union(const std::vector<Homomorphism>& arrows, const GraphPtr& target) {
    Graph I;
    for (const auto& f : arrows) {
        if (!same_graph(f.target_ptr(), target)) fail(ErrorCode::DomainMismatch, "image_union: wrong target");
        for (const auto& [x, attrs] : f.source().nodes) I.nodes[f(x)] = unite(I.nodes[f(x)], attrs);
        for (const auto& [key, attrs] : f.source().edges) {
            EdgeKey k{f(key.first), f(key.second)};
            I.edges[k] = unite(I.edges[k], attrs);
        }
    }
    NodeMap incl;
    for (const auto& [x, _] : I.nodes) incl.emplace(x, x);
    return Homomorphism(share(std::move(I)), target, std::move(incl));
}

InducedRuleHierarchy induced_rule_hierarchy(const Hierarchy& h, const Vertex& origin, const Rule& r,
                                            const Homomorphism& m) {
    if (!h.skeleton.nodes.contains(origin)) fail(ErrorCode::DomainMismatch, "unknown node " + origin);
    RewriteRecord rec = apply_rule(h.graphs.at(origin), r, m);
    const std::set<Vertex> up = h.skeleton.ancestors(origin);
    const std::set<Vertex> down = h.skeleton.descendants(origin);

    std::map<Vertex, LiftingResult> lifts;
    std::map<Vertex, ProjectionResult> projs;
    std::map<Vertex, Homomorphism> other;  // I_v ↣ G_v
    InducedRuleHierarchy out;
    std::map<Vertex, Rule> rules;
    for (const auto& v : h.skeleton.nodes) {
        if (v == origin) {
            rules.emplace(v, r);
            out.instances.emplace(v, m);
        } else if (up.contains(v)) {
            LiftingResult l = lifting_rule(h.path_hom(v, origin), rec);
            rules.emplace(v, l.rule);
            out.instances.emplace(v, l.instance);
            lifts.emplace(v, std::move(l));
        } else if (down.contains(v)) {
            ProjectionResult p = projection_rule(h.path_hom(origin, v), rec);
            rules.emplace(v, p.rule);
            out.instances.emplace(v, p.instance);
            projs.emplace(v, std::move(p));
        }
    }
    // Remaining nodes keep everything, but must contain the images of the
    // lifted patterns above them.
    for (const auto& v : h.skeleton.nodes) {
        if (v == origin || up.contains(v) || down.contains(v)) continue;
        std::vector<Homomorphism> images;
        for (const auto& a : h.skeleton.ancestors(v))
            if (lifts.contains(a)) images.push_back(compose(lifts.at(a).instance, h.path_hom(a, v)));
        Homomorphism inc = image_union(images, h.graphs.at(v));
        rules.emplace(v, identity_rule(inc.source_ptr()));
        out.instances.emplace(v, inc);
        other.emplace(v, inc);
    }

    auto factor = [](const Homomorphism& f, const Homomorphism& n, const SkeletonEdge& e) {
        try {
            return factor_through(f, n);
        } catch (const Error& err) {
            throw rethrow_as(err, ErrorCode::PropagationConflict, edge_name(e));
        }
    };

    std::map<SkeletonEdge, RuleHomomorphism> homs;
    for (const auto& e : h.skeleton.edges) {
        const auto& [s, t] = e;
        const Homomorphism& hst = h.homs.at(e);
        RuleHomomorphism f{hst, hst, hst};
        if (lifts.contains(s) && t == origin) {
            f = lifts.at(s).hom_to_origin;
        } else if (s == origin && projs.contains(t)) {
            f = projs.at(t).hom_from_origin;
        } else if (lifts.contains(s) && projs.contains(t)) {
            f = compose(lifts.at(s).hom_to_origin, projs.at(t).hom_from_origin);
        } else if (lifts.contains(s) && lifts.contains(t)) {
            const LiftingResult& ls = lifts.at(s);
            const LiftingResult& lt = lifts.at(t);
            Pullback lpb{Cospan{lt.h_minus.cospan.left, rec.m}, Span{lt.instance, lt.hom_to_origin.lambda}};
            Homomorphism lambda =
                pb_mediator(lpb, Span{compose(ls.instance, hst), ls.hom_to_origin.lambda});
            Homomorphism hm = pb_mediator(lt.h_minus, Span{compose(ls.h_minus.span.left, hst),
                                                           ls.h_minus.span.right});
            Pullback ppb{Cospan{lt.h_minus.span.right, rec.m_minus}, Span{lt.p_to_h_minus, lt.hom_to_origin.pi}};
            Homomorphism pi = pb_mediator(ppb, Span{compose(ls.p_to_h_minus, hm), ls.hom_to_origin.pi});
            f = RuleHomomorphism{lambda, pi, pi};
        } else if (projs.contains(s) && projs.contains(t)) {
            const ProjectionResult& ps = projs.at(s);
            const ProjectionResult& pt = projs.at(t);
            Homomorphism lambda = factor(compose(ps.instance, hst), pt.instance, e);
            Homomorphism med = po_mediator(ps.t_plus, Cospan{compose(hst, pt.t_plus.cospan.left),
                                                             pt.t_plus.cospan.right});
            Homomorphism rho = factor(compose(ps.rhs_inclusion, med), pt.rhs_inclusion, e);
            f = RuleHomomorphism{lambda, lambda, rho};
        } else if (lifts.contains(s) && other.contains(t)) {
            Homomorphism lambda = factor(compose(lifts.at(s).instance, hst), other.at(t), e);
            Homomorphism pi = compose(lifts.at(s).rule.r_minus, lambda);
            f = RuleHomomorphism{lambda, pi, pi};
        } else if (other.contains(s) && other.contains(t)) {
            Homomorphism lambda = factor(compose(other.at(s), hst), other.at(t), e);
            f = RuleHomomorphism{lambda, lambda, lambda};
        } else if (other.contains(s) && projs.contains(t)) {
            Homomorphism lambda = factor(compose(other.at(s), hst), projs.at(t).instance, e);
            f = RuleHomomorphism{lambda, lambda, compose(lambda, projs.at(t).rule.r_plus)};
        } else {
            fail(ErrorCode::PropagationConflict, edge_name(e) + ": unexpected position relative to " + origin);
        }
        homs.emplace(e, f);
    }

    try {
        out.rules = make_rule_hierarchy(h.skeleton, rules, homs);
    } catch (const Error& err) {
        if (err.code() == ErrorCode::RuleHomViolation)
            throw rethrow_as(err, ErrorCode::PropagationConflict, "propagated rules");
        throw;
    }
    Applicability a = check_applicability(h, out.rules, out.instances);
    if (!a.applicable) fail(ErrorCode::NotApplicable, a.failures.front());
    return out;
}

HierarchyOverlap hierarchy_overlap(const HierarchyRewriteRecord& rec1, const InstanceAssignment& i2) {
    HierarchyOverlap out;
    for (const auto& v : rec1.result.skeleton.nodes) {
        auto it = i2.find(v);
        if (it == i2.end()) fail(ErrorCode::DomainMismatch, "no second instance at " + v);
        out.overlaps.emplace(v, compute_overlap(rec1.records.at(v), it->second));
    }
    for (const auto& e : rec1.result.skeleton.edges) {
        const auto& [s, t] = e;
        const Overlap& os = out.overlaps.at(s);
        const Overlap& ot = out.overlaps.at(t);
        Homomorphism lambda2 = factor_through(compose(i2.at(s), rec1.result.homs.at(e)), i2.at(t));
        Pullback pb{Cospan{rec1.records.at(t).m_plus, i2.at(t)}, Span{ot.x, ot.y}};
        Homomorphism d = pb_mediator(pb, Span{compose(os.x, rec1.rules.homs.at(e).rho), compose(os.y, lambda2)});
        out.homs.emplace(e, d);
    }
    return out;
}

HierarchyComposition compose_rule_hierarchies(const HierarchyRewriteRecord& rec1,
                                              const HierarchyOverlap& o,
                                              const HierarchyRewriteRecord& rec2) {
    if (!(rec2.source == rec1.result))
        fail(ErrorCode::DomainMismatch, "second rewrite does not start at the first result");
    if (!is_hierarchy_rewrite_reversible(rec1))
        fail(ErrorCode::NotReversible, "first hierarchy rewrite is not reversible");

    HierarchyComposition out;
    std::map<Vertex, Rule> rules;
    for (const auto& v : rec1.source.skeleton.nodes) {
        CompositionTrace tr = compose_rules(rec1.records.at(v), o.overlaps.at(v), rec2.records.at(v));
        rules.emplace(v, tr.composed);
        out.instances.emplace(v, tr.m);
        out.rhs_instances.emplace(v, tr.m_plus);
        out.traces.emplace(v, std::move(tr));
    }
    std::map<SkeletonEdge, RuleHomomorphism> homs;
    for (const auto& e : rec1.source.skeleton.edges) {
        const CompositionTrace& ts = out.traces.at(e.first);
        const CompositionTrace& tt = out.traces.at(e.second);
        const Rule& r1s = rec1.records.at(e.first).rule;
        const Rule& r2s = rec2.records.at(e.first).rule;
        Homomorphism u1 = factor_through(compose(ts.m1_H, rec1.homs_minus.at(e)), tt.m1_H);
        Homomorphism u2 = factor_through(compose(ts.m2_H, rec2.homs_minus.at(e)), tt.m2_H);
        Pushout lpo{Span{r1s.r_minus, ts.p1_H}, Cospan{ts.l1_H, ts.h1_minus}};
        Homomorphism lambda = po_mediator(
            lpo, Cospan{compose(rec1.rules.homs.at(e).lambda, tt.l1_H), compose(u1, tt.h1_minus)});
        Pushout rpo{Span{r2s.r_plus, ts.p2_H}, Cospan{ts.r2_H, ts.h2_plus}};
        Homomorphism rho = po_mediator(
            rpo, Cospan{compose(rec2.rules.homs.at(e).rho, tt.r2_H), compose(u2, tt.h2_plus)});
        Pullback ppb{Cospan{tt.h1_plus, tt.h2_minus}, Span{tt.p_prime, tt.p_dblprime}};
        Homomorphism pi = pb_mediator(ppb, Span{compose(ts.p_prime, u1), compose(ts.p_dblprime, u2)});
        homs.emplace(e, RuleHomomorphism{lambda, pi, rho});
    }
    out.rules = make_rule_hierarchy(rec1.source.skeleton, rules, homs);
    return out;
}

}  // namespace sqpo
