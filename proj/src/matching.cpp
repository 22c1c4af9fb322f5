#include "sqpo/matching.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace sqpo {
namespace {

enum class Mode { Inclusion, Exact };
enum class Order { MostConstrained, ById };

// Backtracking search for injective node maps. Candidate sets come from
// the neighbourhood of an already placed neighbour when one exists.
class Matcher {
public:
    Matcher(const GraphPtr& pattern, const GraphPtr& host, Mode mode, Order order)
        : pattern_(pattern), host_(host), mode_(mode) {
        for (const auto& [key, _] : host->edges) {
            out_[key.first].push_back(key.second);
            in_[key.second].push_back(key.first);
        }
        for (const auto& [id, _] : host->nodes) host_ids_.push_back(&id);
        build_order(order);
    }

    // Visits matches until the callback returns false.
    void run(const std::function<bool(const NodeMap&)>& visit) {
        if (pattern_->nodes.size() > host_->nodes.size()) return;
        if (mode_ == Mode::Exact && (pattern_->nodes.size() != host_->nodes.size() ||
                                     pattern_->edges.size() != host_->edges.size()))
            return;
        visit_ = &visit;
        stop_ = false;
        assignment_.clear();
        used_.clear();
        extend(0);
    }

private:
    struct Step {
        const NodeId* node;
        // Previously placed neighbour used to seed candidates.
        const NodeId* anchor = nullptr;
        bool anchor_is_source = false;  // anchor -> node
    };

    void build_order(Order order) {
        std::vector<const NodeId*> remaining;
        std::unordered_map<NodeId, std::vector<NodeId>> nbrs;
        for (const auto& [key, _] : pattern_->edges) {
            if (key.first == key.second) continue;
            nbrs[key.first].push_back(key.second);
            nbrs[key.second].push_back(key.first);
        }
        for (const auto& [id, _] : pattern_->nodes) remaining.push_back(&id);
        std::set<NodeId> placed;
        while (!remaining.empty()) {
            auto pick = remaining.begin();
            if (order == Order::MostConstrained) {
                auto score = [&](const NodeId* n) {
                    int connected = 0;
                    for (const auto& x : nbrs[*n]) connected += placed.contains(x);
                    return std::pair(connected, static_cast<int>(nbrs[*n].size()));
                };
                for (auto it = remaining.begin(); it != remaining.end(); ++it)
                    if (score(*it) > score(*pick)) pick = it;
            }
            Step step{*pick};
            for (const auto& [key, _] : pattern_->edges) {
                if (key.first == key.second) continue;
                if (key.second == *step.node && placed.contains(key.first)) {
                    step.anchor = &key.first;
                    step.anchor_is_source = true;
                    break;
                }
                if (key.first == *step.node && placed.contains(key.second)) {
                    step.anchor = &key.second;
                    step.anchor_is_source = false;
                    break;
                }
            }
            placed.insert(*step.node);
            steps_.push_back(step);
            remaining.erase(pick);
        }
    }

    bool attrs_ok(const AttrSet& pat, const AttrSet& host) const {
        return mode_ == Mode::Exact ? pat == host : host.includes(pat);
    }

    bool consistent(const NodeId& p, const NodeId& h) const {
        if (!attrs_ok(pattern_->node_attrs(p), host_->node_attrs(h))) return false;
        auto check_pair = [&](const NodeId& ps, const NodeId& pt, const NodeId& hs,
                              const NodeId& ht) {
            auto pe = pattern_->edges.find({ps, pt});
            auto he = host_->edges.find({hs, ht});
            if (pe != pattern_->edges.end()) {
                if (he == host_->edges.end()) return false;
                return attrs_ok(pe->second, he->second);
            }
            return mode_ != Mode::Exact || he == host_->edges.end();
        };
        if (!check_pair(p, p, h, h)) return false;
        for (const auto& [q, hq] : assignment_) {
            if (!check_pair(p, q, h, hq)) return false;
            if (!check_pair(q, p, hq, h)) return false;
        }
        return true;
    }

    void extend(std::size_t depth) {
        if (stop_) return;
        if (depth == steps_.size()) {
            if (!(*visit_)(assignment_)) stop_ = true;
            return;
        }
        const Step& step = steps_[depth];
        auto try_candidate = [&](const NodeId& h) {
            if (used_.contains(h) || !consistent(*step.node, h)) return;
            assignment_.emplace(*step.node, h);
            used_.insert(h);
            extend(depth + 1);
            used_.erase(h);
            assignment_.erase(*step.node);
        };
        if (step.anchor) {
            const NodeId& anchor_image = assignment_.at(*step.anchor);
            const auto& adj = step.anchor_is_source ? out_ : in_;
            auto it = adj.find(anchor_image);
            if (it == adj.end()) return;
            std::vector<NodeId> cands = it->second;
            std::sort(cands.begin(), cands.end());
            for (const auto& h : cands) {
                try_candidate(h);
                if (stop_) return;
            }
        } else {
            for (const NodeId* h : host_ids_) {
                try_candidate(*h);
                if (stop_) return;
            }
        }
    }

    GraphPtr pattern_;
    GraphPtr host_;
    Mode mode_;
    std::unordered_map<NodeId, std::vector<NodeId>> out_;
    std::unordered_map<NodeId, std::vector<NodeId>> in_;
    std::vector<const NodeId*> host_ids_;
    std::vector<Step> steps_;
    const std::function<bool(const NodeMap&)>* visit_ = nullptr;
    bool stop_ = false;
    NodeMap assignment_;
    std::set<NodeId> used_;
};

bool image_less(const Homomorphism& a, const Homomorphism& b) {
    // Node maps iterate in pattern-id order, so comparing mapped values in
    // sequence is the lexicographic order on image tuples.
    return std::lexicographical_compare(
        a.node_map().begin(), a.node_map().end(), b.node_map().begin(), b.node_map().end(),
        [](const auto& x, const auto& y) { return x.second < y.second; });
}

}  // namespace

std::vector<Homomorphism> find_monomorphisms(const GraphPtr& pattern, const GraphPtr& host) {
    std::vector<Homomorphism> out;
    Matcher m(pattern, host, Mode::Inclusion, Order::MostConstrained);
    m.run([&](const NodeMap& a) {
        out.emplace_back(pattern, host, a);
        return true;
    });
    std::sort(out.begin(), out.end(), image_less);
    return out;
}

std::optional<Homomorphism> first_monomorphism(const GraphPtr& pattern, const GraphPtr& host) {
    // Placing pattern nodes in id order with sorted candidates visits
    // assignments in lexicographic order, so the first hit is the minimum.
    std::optional<Homomorphism> out;
    Matcher m(pattern, host, Mode::Inclusion, Order::ById);
    m.run([&](const NodeMap& a) {
        out.emplace(pattern, host, a);
        return false;
    });
    return out;
}

std::size_t count_monomorphisms(const GraphPtr& pattern, const GraphPtr& host, std::size_t cap) {
    std::size_t n = 0;
    Matcher m(pattern, host, Mode::Inclusion, Order::MostConstrained);
    m.run([&](const NodeMap&) { return ++n < cap; });
    return n;
}

std::optional<Homomorphism> find_isomorphism(const GraphPtr& g1, const GraphPtr& g2) {
    if (same_graph(g1, g2)) return Homomorphism(g1, g2, Homomorphism::identity(g1).node_map());
    std::optional<Homomorphism> out;
    Matcher m(g1, g2, Mode::Exact, Order::ById);
    m.run([&](const NodeMap& a) {
        out.emplace(g1, g2, a);
        return false;
    });
    return out;
}

bool isomorphic(const GraphPtr& g1, const GraphPtr& g2) {
    if (same_graph(g1, g2)) return true;
    bool found = false;
    Matcher m(g1, g2, Mode::Exact, Order::MostConstrained);
    m.run([&](const NodeMap&) {
        found = true;
        return false;
    });
    return found;
}

}  // namespace sqpo
