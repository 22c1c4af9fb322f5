#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sqpo/codec.hpp"
#include "sqpo/hierarchy.hpp"

namespace sqpo {

inline constexpr const char* kTrailFormat = "sqpo-trail/1";

enum class TrailKind { Object, Hierarchy };

/// Trail over single graphs.
struct ObjectModel {
    using State = GraphPtr;
    using RuleT = Rule;
    using Instance = Homomorphism;
    using InstanceMap = NodeMap;
    using Record = RewriteRecord;
    static constexpr TrailKind kind = TrailKind::Object;
};

/// Trail over hierarchies; rules are rule hierarchies.
struct HierarchyModel {
    using State = Hierarchy;
    using RuleT = RuleHierarchy;
    using Instance = InstanceAssignment;
    using InstanceMap = std::map<Vertex, NodeMap>;
    using Record = HierarchyRewriteRecord;
    static constexpr TrailKind kind = TrailKind::Hierarchy;
};

struct CommitInfo {
    std::string id;
    std::optional<std::string> parent;
    std::string message;
    std::string timestamp;

    friend bool operator==(const CommitInfo&, const CommitInfo&) = default;
};

/// Stored rules are instantiated: L ids are ids of the state the rule was
/// applied to, R ids are ids of the state it produced.
template <class M>
struct Commit {
    CommitInfo info;
    typename M::RuleT rule;
    typename M::InstanceMap rhs_instance;

    friend bool operator==(const Commit&, const Commit&) = default;
};

/// Rule and instance leading from the head to another branch's state. The
/// rule is instantiated like commits, so its L ids are head ids.
template <class M>
struct Delta {
    typename M::RuleT rule;
    typename M::InstanceMap instance;

    friend bool operator==(const Delta&, const Delta&) = default;
};

template <class M>
struct BasicTrail {
    typename M::State head;
    std::string current_branch;
    std::map<std::string, std::vector<Commit<M>>> lineages;
    std::map<std::string, Delta<M>> deltas;

    const std::vector<Commit<M>>& commits() const { return lineages.at(current_branch); }
    std::vector<std::string> branches() const;
};

template <class M>
bool operator==(const BasicTrail<M>& a, const BasicTrail<M>& b);

using Trail = BasicTrail<ObjectModel>;
using HierarchyTrail = BasicTrail<HierarchyModel>;

struct ObjectMergeSpec {
    GraphPtr M;
    NodeMap r_plus_bar;   // L_Δ → M
    NodeMap r_minus_bar;  // R_Δ → M
};

struct HierarchyMergeSpec {
    Hierarchy M;
    std::map<Vertex, NodeMap> r_plus_bar;
    std::map<Vertex, NodeMap> r_minus_bar;
};

template <class M>
using MergeSpecOf = std::conditional_t<M::kind == TrailKind::Object, ObjectMergeSpec, HierarchyMergeSpec>;

template <class M>
BasicTrail<M> trail_init(const typename M::State& initial, const std::string& branch = "main");

/// Applies rule at instance; rejected with NotReversible unless reversible.
/// Deltas of all other branches are re-rooted at the new head.
template <class M>
BasicTrail<M> commit(const BasicTrail<M>& t, const typename M::RuleT& rule,
                     const typename M::Instance& instance, const std::string& message,
                     const std::string& timestamp);

template <class M>
std::vector<CommitInfo> log(const BasicTrail<M>& t);

/// Keeps the first `keep` commits of the current branch.
template <class M>
BasicTrail<M> rollback(const BasicTrail<M>& t, std::size_t keep);

template <class M>
BasicTrail<M> branch(const BasicTrail<M>& t, const std::string& name);

template <class M>
BasicTrail<M> switch_branch(const BasicTrail<M>& t, const std::string& name);

/// State of a branch, obtained by applying its delta to the head.
template <class M>
typename M::State materialize(const BasicTrail<M>& t, const std::string& name);

/// The two sides of the canonical merge with `name`: the merging rule
/// applied to the head and the symmetric one applied to the branch state.
template <class M>
std::pair<typename M::State, typename M::State> merge_faces(const BasicTrail<M>& t, const std::string& name);

template <class M>
BasicTrail<M> merge_canonical(const BasicTrail<M>& t, const std::string& name, const std::string& message,
                              const std::string& timestamp);

template <class M>
BasicTrail<M> merge_with_spec(const BasicTrail<M>& t, const std::string& name, const MergeSpecOf<M>& spec,
                              const std::string& message, const std::string& timestamp);

// Store: directory with STATE, TRAIL, DELTAS, HEAD and FORMAT documents.

template <class M>
void save_trail(const BasicTrail<M>& t, const std::filesystem::path& dir);

template <class M>
BasicTrail<M> load_trail(const std::filesystem::path& dir);

/// Kind recorded in a store; throws StoreCorrupt or VersionMismatch.
TrailKind store_kind(const std::filesystem::path& dir);

/// Exclusive advisory lock on a store; throws StoreLocked when held.
class StoreLock {
public:
    explicit StoreLock(const std::filesystem::path& dir);
    ~StoreLock();
    StoreLock(const StoreLock&) = delete;
    StoreLock& operator=(const StoreLock&) = delete;

private:
    int fd_ = -1;
};

/// Hex SHA-256 of a string.
std::string sha256_hex(const std::string& data);

}  // namespace sqpo
