#include "sqpo/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sqpo/audit.hpp"
#include "sqpo/error.hpp"
#include "sqpo/matching.hpp"

namespace sqpo {
namespace {

struct Options {
    std::string store = ".sqpo";
    bool machine = false;

    std::string graph_file, hierarchy_file, branch_name = "main";
    std::string rule_file, instance_file, message, at;
    bool match_first = false;
    std::size_t keep = 0;
    std::string name, spec_file, format = "canonical", out_file, show_branch;
};

Json read_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_json(ss.str(), path);
}

std::filesystem::path store_dir(const Options& o) {
    if (const char* env = std::getenv("SQPO_STORE"); env && *env) return env;
    return o.store;
}

void print_doc(std::ostream& out, const Json& j, const Options& o) {
    if (o.machine || o.format == "canonical")
        out << dump_canonical(j) << '\n';
    else
        out << j.dump(2) << '\n';
}

// Picks the instance of `pattern` in `host`: explicit file, first match, or
// the unique match.
Homomorphism choose_instance(const GraphPtr& pattern, const GraphPtr& host, const Options& o) {
    if (!o.instance_file.empty()) return instance_from_json(read_json(o.instance_file), pattern, host);
    if (o.match_first) {
        auto m = first_monomorphism(pattern, host);
        if (!m) fail(ErrorCode::NoMatch, "the rule's left-hand side has no match");
        return *m;
    }
    std::size_t n = count_monomorphisms(pattern, host, 2);
    if (n == 0) fail(ErrorCode::NoMatch, "the rule's left-hand side has no match");
    if (n > 1) fail(ErrorCode::AmbiguousMatch, "several matches; use --match-first or --instance");
    return *first_monomorphism(pattern, host);
}

void report(std::ostream& out, const Options& o, const std::string& human, const Json& doc) {
    if (o.machine)
        out << dump_canonical(doc) << '\n';
    else
        out << human << '\n';
}

template <class M>
Json status_doc(const BasicTrail<M>& t) {
    Json j;
    j["branch"] = t.current_branch;
    j["commits"] = t.commits().size();
    j["head_commit"] = t.commits().empty() ? Json(nullptr) : Json(t.commits().back().info.id);
    return j;
}

template <class M>
std::string short_head(const BasicTrail<M>& t) {
    return t.commits().empty() ? "(none)" : t.commits().back().info.id.substr(0, 12);
}

ObjectMergeSpec object_spec(const Json& j) {
    try {
        return ObjectMergeSpec{share(graph_from_json(j.at("M"), "spec.M")),
                               node_map_from_json(j.at("r_plus_bar"), "spec.r_plus_bar"),
                               node_map_from_json(j.at("r_minus_bar"), "spec.r_minus_bar")};
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::SchemaError, std::string("merge spec: ") + e.what());
    }
}

HierarchyMergeSpec hierarchy_spec(const Json& j) {
    try {
        HierarchyMergeSpec s{hierarchy_from_json(j.at("M"), "spec.M"), {}, {}};
        for (const auto& [v, m] : j.at("r_plus_bar").items())
            s.r_plus_bar.emplace(v, node_map_from_json(m, "spec.r_plus_bar." + v));
        for (const auto& [v, m] : j.at("r_minus_bar").items())
            s.r_minus_bar.emplace(v, node_map_from_json(m, "spec.r_minus_bar." + v));
        return s;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::SchemaError, std::string("merge spec: ") + e.what());
    }
}

BasicTrail<ObjectModel> apply_to(const BasicTrail<ObjectModel>& t, const Options& o, const std::string& ts) {
    if (!o.at.empty()) fail(ErrorCode::Usage, "--at applies to hierarchy stores only");
    Rule r = rule_from_json(read_json(o.rule_file));
    return commit(t, r, choose_instance(r.lhs_ptr(), t.head, o), o.message, ts);
}

BasicTrail<HierarchyModel> apply_to(const BasicTrail<HierarchyModel>& t, const Options& o, const std::string& ts) {
    Json doc = read_json(o.rule_file);
    if (!o.at.empty()) {
        auto g = t.head.graphs.find(o.at);
        if (g == t.head.graphs.end()) fail(ErrorCode::Usage, "no hierarchy node " + o.at);
        Rule r = rule_from_json(doc);
        InducedRuleHierarchy ir = induced_rule_hierarchy(t.head, o.at, r, choose_instance(r.lhs_ptr(), g->second, o));
        return commit(t, ir.rules, ir.instances, o.message, ts);
    }
    if (o.instance_file.empty()) fail(ErrorCode::Usage, "a rule hierarchy needs --instance (or use --at)");
    RuleHierarchy r = rule_hierarchy_from_json(doc);
    return commit(t, r, instances_from_json(read_json(o.instance_file), r, t.head), o.message, ts);
}

template <class M>
int dispatch(const std::string& cmd, const Options& o, std::ostream& out) {
    std::filesystem::path dir = store_dir(o);
    auto mutate = [&](auto&& fn) {
        StoreLock lock(dir);
        BasicTrail<M> t = fn(load_trail<M>(dir));
        save_trail(t, dir);
        return t;
    };
    if (cmd == "apply") {
        std::string ts = current_timestamp();
        auto t = mutate([&](const BasicTrail<M>& t0) { return apply_to(t0, o, ts); });
        report(out, o, "[" + t.current_branch + " " + short_head(t) + "] " + o.message, status_doc(t));
    } else if (cmd == "log") {
        auto t = load_trail<M>(dir);
        Json arr = Json::array();
        for (const auto& c : log(t)) {
            arr.push_back({{"id", c.id},
                           {"parent", c.parent ? Json(*c.parent) : Json(nullptr)},
                           {"message", c.message},
                           {"timestamp", c.timestamp}});
            if (!o.machine) out << c.id.substr(0, 12) << ' ' << c.timestamp << ' ' << c.message << '\n';
        }
        if (o.machine) out << dump_canonical(arr) << '\n';
    } else if (cmd == "rollback") {
        auto t = mutate([&](const BasicTrail<M>& t0) { return rollback(t0, o.keep); });
        report(out, o, "rolled back " + t.current_branch + " to " + std::to_string(o.keep) + " commits", status_doc(t));
    } else if (cmd == "branch") {
        auto t = mutate([&](const BasicTrail<M>& t0) { return branch(t0, o.name); });
        report(out, o, "created branch " + o.name, status_doc(t));
    } else if (cmd == "switch") {
        auto t = mutate([&](const BasicTrail<M>& t0) { return switch_branch(t0, o.name); });
        report(out, o, "switched to " + o.name, status_doc(t));
    } else if (cmd == "merge") {
        std::string ts = current_timestamp();
        std::string msg = o.message.empty() ? "merge " + o.name : o.message;
        auto t = mutate([&](const BasicTrail<M>& t0) {
            if (o.spec_file.empty()) return merge_canonical(t0, o.name, msg, ts);
            Json j = read_json(o.spec_file);
            if constexpr (M::kind == TrailKind::Object)
                return merge_with_spec(t0, o.name, object_spec(j), msg, ts);
            else
                return merge_with_spec(t0, o.name, hierarchy_spec(j), msg, ts);
        });
        report(out, o, "[" + t.current_branch + " " + short_head(t) + "] " + msg, status_doc(t));
    } else if (cmd == "show") {
        auto t = load_trail<M>(dir);
        auto state = o.show_branch.empty() ? t.head : materialize(t, o.show_branch);
        if constexpr (M::kind == TrailKind::Object)
            print_doc(out, graph_to_json(*state), o);
        else
            print_doc(out, hierarchy_to_json(state), o);
    } else if (cmd == "export") {
        load_trail<M>(dir);
        Json doc;
        for (const char* f : {"FORMAT", "HEAD", "STATE", "TRAIL", "DELTAS"}) doc[f] = read_json((dir / f).string());
        if (o.out_file.empty()) {
            out << dump_canonical(doc) << '\n';
        } else {
            std::ofstream f(o.out_file, std::ios::binary | std::ios::trunc);
            if (!(f << dump_canonical(doc) << '\n')) fail(ErrorCode::Io, "cannot write " + o.out_file);
        }
    }
    return 0;
}

int init(const Options& o, std::ostream& out) {
    std::filesystem::path dir = store_dir(o);
    if (o.graph_file.empty() == o.hierarchy_file.empty())
        fail(ErrorCode::Usage, "init needs exactly one of --graph and --hierarchy");
    if (std::filesystem::exists(dir / "FORMAT")) fail(ErrorCode::Io, "a store already exists at " + dir.string());
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    StoreLock lock(dir);
    Json status;
    if (!o.graph_file.empty()) {
        auto t = trail_init<ObjectModel>(share(graph_from_json(read_json(o.graph_file))), o.branch_name);
        save_trail(t, dir);
        status = status_doc(t);
    } else {
        auto t = trail_init<HierarchyModel>(hierarchy_from_json(read_json(o.hierarchy_file)), o.branch_name);
        save_trail(t, dir);
        status = status_doc(t);
    }
    report(out, o, "initialized store " + dir.string(), status);
    return 0;
}

}  // namespace

std::string current_timestamp() {
    if (const char* env = std::getenv("SQPO_TIMESTAMP"); env && *env) return env;
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Reversible graph rewriting with an audit trail", "sqpo"};
    app.require_subcommand(1);
    app.add_option("--store", o.store, "Store directory (SQPO_STORE overrides)");
    app.add_flag("--machine", o.machine, "Print one canonical JSON document");

    auto* init_cmd = app.add_subcommand("init", "Create a store");
    init_cmd->add_option("--graph", o.graph_file, "Initial graph");
    init_cmd->add_option("--hierarchy", o.hierarchy_file, "Initial hierarchy");
    init_cmd->add_option("--branch", o.branch_name, "Name of the first branch");

    auto* apply_cmd = app.add_subcommand("apply", "Rewrite the head and commit");
    apply_cmd->add_option("--rule", o.rule_file, "Rule or rule hierarchy")->required();
    auto* first = apply_cmd->add_flag("--match-first", o.match_first, "Use the first match");
    apply_cmd->add_option("--instance", o.instance_file, "Explicit instance")->excludes(first);
    apply_cmd->add_option("-m,--message", o.message, "Commit message");
    apply_cmd->add_option("--at", o.at, "Hierarchy node to rewrite, propagating to the others");

    app.add_subcommand("log", "List commits of the current branch");
    auto* rollback_cmd = app.add_subcommand("rollback", "Keep only the first N commits");
    rollback_cmd->add_option("index", o.keep, "Number of commits to keep")->required();
    auto* branch_cmd = app.add_subcommand("branch", "Create a branch at the head");
    branch_cmd->add_option("name", o.name)->required();
    auto* switch_cmd = app.add_subcommand("switch", "Switch to another branch");
    switch_cmd->add_option("name", o.name)->required();
    auto* merge_cmd = app.add_subcommand("merge", "Merge a branch into the current one");
    merge_cmd->add_option("name", o.name)->required();
    merge_cmd->add_option("--spec", o.spec_file, "Non-canonical merge specification");
    merge_cmd->add_option("-m,--message", o.message, "Commit message");
    auto* show_cmd = app.add_subcommand("show", "Print the head state");
    show_cmd->add_option("--format", o.format)->check(CLI::IsMember({"pretty", "canonical"}));
    show_cmd->add_option("--branch", o.show_branch, "Print another branch's state");
    auto* export_cmd = app.add_subcommand("export", "Print the whole store as one document");
    export_cmd->add_option("--out", o.out_file, "Write to a file instead");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error[" << code_name(ErrorCode::Usage) << "]: " << e.what() << '\n';
        return 2;
    }

    std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "init") return init(o, out);
        if (store_kind(store_dir(o)) == TrailKind::Object) return dispatch<ObjectModel>(cmd, o, out);
        return dispatch<HierarchyModel>(cmd, o, out);
    } catch (const Error& e) {
        err << "error[" << code_name(e.code()) << "]: " << e.what() << '\n';
        return is_domain_error(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        err << "error[" << code_name(ErrorCode::Io) << "]: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace sqpo
