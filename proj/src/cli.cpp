// cli.cpp - subcommand wiring for the treeproj tool
#include "treeproj/errors.hpp"
#include "treeproj/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace treeproj {

namespace {

using nlohmann::json;

constexpr int kExitSolution = 0;
constexpr int kExitNoSolution = 2;
constexpr int kExitFail = 3;
constexpr int kExitUsage = 64;
constexpr int kExitBudget = 65;
constexpr int kExitInternal = 70;

int status_exit(const SolveOutcome& out) {
    switch (out.status) {
    case SolveOutcome::Status::Solution:
        return kExitSolution;
    case SolveOutcome::Status::NoSolution:
        return kExitNoSolution;
    case SolveOutcome::Status::Fail:
        return kExitFail;
    }
    return kExitInternal;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write file: " + path);
    out << text << "\n";
}

json annotated_to_json(const AnnotatedRelation& r, bool minimize) {
    json j;
    j["scope"] = r.scope;
    j["tuples"] = json::array();
    for (const auto& [row, val] : r.rows) {
        json e;
        e["tuple"] = json::array();
        for (Tok t : row)
            e["tuple"].push_back(tok_str(t));
        e["value"] = (minimize ? val.negated() : val).to_token();
        j["tuples"].push_back(std::move(e));
    }
    return j;
}

json instance_relations_to_json(const CspInstance& inst) {
    json j = json::object();
    for (const auto& a : inst.formula) {
        json rows = json::array();
        const Relation& r = inst.rel(a);
        for (size_t i = 0; i < r.rows.size(); ++i)
            rows.push_back(r.row_strings(i));
        std::sort(rows.begin(), rows.end());
        j[a.symbol] = std::move(rows);
    }
    return j;
}

JoinTree witness_or_throw(const CspInstance& inst) {
    auto jt = is_acyclic(hypergraph_of(inst.formula));
    if (!jt)
        throw SchemaError("instance is not acyclic");
    return *jt;
}

int cmd_solve_max(const std::string& file, bool use_fpt) {
    Budgets budgets = Budgets::from_environment();
    ParsedInstance pi = parse_instance(file);
    auto [views, vdb] = resolve_views(pi, budgets);
    SolveOutcome out;
    if (use_fpt) {
        auto flat = solving_flat(pi);
        if (!flat)
            throw SchemaError("--fpt requires a flat (single-operator) valuation");
        FptOutcome fpt = fpt_max(pi.instance, *flat, views, vdb, pi.output, budgets.fpt_parameter);
        out = fpt.outcome;
        json j = json::parse(outcome_to_json(out, pi.minimize));
        j["trees_explored"] = fpt.trees_explored;
        if (fpt.chosen)
            j["structured_form"] = fpt.chosen->to_string();
        std::cout << j.dump() << "\n";
        return status_exit(out);
    }
    out = certified_max(pi.instance, solving_valuation(pi), views, vdb, pi.output);
    std::cout << outcome_to_json(out, pi.minimize) << "\n";
    return status_exit(out);
}

int cmd_solve_topk(const std::string& file, size_t k, bool ndjson) {
    Budgets budgets = Budgets::from_environment();
    ParsedInstance pi = parse_instance(file);
    auto [views, vdb] = resolve_views(pi, budgets);
    size_t kk = k > 0 ? k : pi.topk;
    TopKStream stream(pi.instance, solving_valuation(pi), views, vdb, pi.output, kk);

    size_t emitted = 0;
    json all = json::array();
    while (auto item = stream.next()) {
        json j;
        j["assignment"] = json::object();
        for (const auto& [var, val] : item->assignment.bindings)
            j["assignment"][var] = val;
        j["weight"] = (pi.minimize ? item->weight.negated() : item->weight).to_token();
        if (ndjson) {
            std::cout << j.dump() << std::endl; // flushed per solution
        } else {
            all.push_back(std::move(j));
        }
        ++emitted;
    }
    if (stream.failed()) {
        json j;
        j["status"] = "fail";
        j["fail_reason"] = stream.fail_reason();
        j["certified_prefix_length"] = emitted;
        std::cout << j.dump() << std::endl;
        return kExitFail;
    }
    if (!ndjson)
        std::cout << all.dump() << "\n";
    return emitted > 0 ? kExitSolution : kExitNoSolution;
}

int cmd_consistency_pairwise(const std::string& file) {
    Budgets budgets = Budgets::from_environment();
    ParsedInstance pi = parse_instance(file);
    auto [views, vdb] = resolve_views(pi, budgets);
    auto [reduced, empty] = enforce_pairwise(views, vdb);
    json j;
    j["empty"] = empty;
    j["views"] = json::object();
    for (const auto& w : views.views)
        j["views"][w.symbol] = reduced.relations.at(w.symbol).size();
    std::cout << j.dump() << "\n";
    return empty ? kExitNoSolution : kExitSolution;
}

int cmd_consistency_global(const std::string& file, int processors,
                           const std::string& stats_path) {
    ParsedInstance pi = parse_instance(file);
    JoinTree jt = witness_or_throw(pi.instance);
    EJoinTree t = build_ejointree(pi.instance, jt);
    MachineConfig cfg;
    cfg.processors = processors;
    auto [reduced, stats] = global_consistency(pi.instance, t, cfg);
    json j;
    j["relations"] = instance_relations_to_json(reduced);
    j["stats"] = json::parse(stats_to_json(stats));
    std::cout << j.dump() << "\n";
    if (!stats_path.empty())
        write_text(stats_path, stats_to_json(stats));
    bool all_empty = true;
    for (const auto& a : reduced.formula)
        if (!reduced.rel(a).rows.empty())
            all_empty = false;
    return all_empty ? kExitNoSolution : kExitSolution;
}

int cmd_parallel_acq(const std::string& file, int processors, const std::string& stats_path,
                     bool log_contraction, bool best) {
    ParsedInstance pi = parse_instance(file);
    auto flat = solving_flat(pi);
    if (!flat)
        throw SchemaError("parallel acq requires a flat (single-operator) valuation");
    JoinTree jt = witness_or_throw(pi.instance);
    MachineConfig cfg;
    cfg.processors = processors;

    // establish global consistency on the machine, then run ACQ
    EJoinTree t0 = build_ejointree(pi.instance, jt);
    auto [reduced, gc_stats] = global_consistency(pi.instance, t0, cfg);
    EJoinTree t = build_ejointree(reduced, jt);

    std::vector<AcqLogEntry> log;
    auto [rel, stats] = acq(reduced, *flat, pi.output, t, cfg, log_contraction ? &log : nullptr);
    json j;
    j["output"] = annotated_to_json(rel, pi.minimize);
    j["stats"] = json::parse(stats_to_json(stats));
    j["global_consistency_stats"] = json::parse(stats_to_json(gc_stats));
    if (log_contraction)
        j["contraction_log_entries"] = log.size();
    if (best) {
        try {
            auto [theta, w] = extract_one_best(reduced, *flat, t, cfg);
            json b;
            b["assignment"] = json::object();
            for (const auto& [var, val] : theta.bindings)
                b["assignment"][var] = val;
            b["weight"] = (pi.minimize ? w.negated() : w).to_token();
            j["best"] = std::move(b);
        } catch (const NoSolutionError&) {
            j["best"] = nullptr;
        }
    }
    std::cout << j.dump() << "\n";
    if (!stats_path.empty())
        write_text(stats_path, stats_to_json(stats));
    return rel.rows.empty() ? kExitNoSolution : kExitSolution;
}

int cmd_oracle(const std::string& mode, const std::string& file, size_t k) {
    Budgets budgets = Budgets::from_environment();
    ParsedInstance pi = parse_instance(file);
    if (mode == "solutions") {
        SolutionSet sols = brute_force_solutions(pi.instance, budgets.oracle);
        json j = json::array();
        for (const auto& s : sols.solutions) {
            json a = json::object();
            for (const auto& [var, val] : s.bindings)
                a[var] = val;
            j.push_back(std::move(a));
        }
        std::cout << j.dump() << "\n";
        return sols.solutions.empty() ? kExitNoSolution : kExitSolution;
    }
    StructuredValuation sv = solving_valuation(pi);
    if (mode == "max") {
        OracleAnswer ans = oracle_max(pi.instance, sv, pi.output, budgets.oracle);
        json j;
        if (ans.no_solution) {
            j["status"] = "no-solution";
        } else {
            j["status"] = "solution";
            j["assignment"] = json::object();
            for (const auto& [var, val] : ans.assignment.bindings)
                j["assignment"][var] = val;
            j["weight"] = (pi.minimize ? ans.weight.negated() : ans.weight).to_token();
        }
        std::cout << j.dump() << "\n";
        return ans.no_solution ? kExitNoSolution : kExitSolution;
    }
    // topk
    size_t kk = k > 0 ? k : pi.topk;
    auto list = oracle_topk(pi.instance, sv, pi.output, kk, budgets.oracle);
    json j = json::array();
    for (const auto& [a, w] : list) {
        json e;
        e["assignment"] = json::object();
        for (const auto& [var, val] : a.bindings)
            e["assignment"][var] = val;
        e["weight"] = (pi.minimize ? w.negated() : w).to_token();
        j.push_back(std::move(e));
    }
    std::cout << j.dump() << "\n";
    return list.empty() ? kExitNoSolution : kExitSolution;
}

int cmd_views_generate(const std::string& file, const std::string& method, unsigned k,
                       const std::string& out_path) {
    Budgets budgets = Budgets::from_environment();
    ParsedInstance pi = parse_instance(file);
    pi.view_spec.kind = ViewSpec::Kind::Generator;
    pi.view_spec.method = method;
    pi.view_spec.k = k;
    auto [views, vdb] = resolve_views(pi, budgets);

    json ex;
    ex["views"] = json::array();
    for (const auto& w : views.views) {
        json v;
        v["name"] = w.symbol;
        v["scope"] = w.scope;
        v["tuples"] = json::array();
        const Relation& r = vdb.relations.at(w.symbol);
        for (size_t i = 0; i < r.rows.size(); ++i)
            v["tuples"].push_back(r.row_strings(i));
        std::sort(v["tuples"].begin(), v["tuples"].end());
        ex["views"].push_back(std::move(v));
    }
    ex["base_map"] = json::object();
    for (const auto& [atom, view] : views.base_view_of)
        ex["base_map"][atom] = view;
    json out;
    out["explicit"] = std::move(ex);
    write_text(out_path, out.dump(2));
    std::cout << "{\"views\":" << views.views.size() << ",\"written\":\"" << out_path << "\"}\n";
    return 0;
}

int cmd_check_embedding(const std::string& file, const std::string& tp_path) {
    Budgets budgets = Budgets::from_environment();
    ParsedInstance pi = parse_instance(file);
    auto flat = solving_flat(pi);
    if (!flat)
        throw SchemaError("check embedding requires a flat (single-operator) valuation");
    auto [views, vdb] = resolve_views(pi, budgets);

    std::ifstream in(tp_path);
    if (!in)
        throw ParseError("cannot open file: " + tp_path);
    json tpj;
    try {
        in >> tpj;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json parse error in tree projection file: ") + e.what());
    }
    Hypergraph ha;
    for (const auto& edge : tpj.at("hyperedges")) {
        VarSet e;
        for (const auto& v : edge)
            e.insert(v.get<std::string>());
        ha.nodes.insert(e.begin(), e.end());
        ha.edges.insert(std::move(e));
    }

    Hypergraph h_phi = hypergraph_of(pi.instance.formula);
    Hypergraph h_v = view_hypergraph(views);
    json j;
    j["tree_projection_valid"] = is_tree_projection(ha, h_phi, h_v);
    try {
        auto [sv, emb] = svf_from_tree_projection(*flat, pi.output, ha);
        OutputAwareParseTree t = build_output_aware_tree(sv, pi.output);
        bool ok = check_embedding(emb, t, ha);
        j["embedding_valid"] = ok;
        j["structured_form"] = sv.to_string();
        std::cout << j.dump() << "\n";
        return ok && j["tree_projection_valid"].get<bool>() ? kExitSolution : kExitFail;
    } catch (const ConditionFailed& e) {
        j["embedding_valid"] = false;
        j["condition_failed"] = std::string(1, e.which);
        j["error"] = e.what();
        std::cout << j.dump() << "\n";
        return kExitFail;
    }
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"tree-projection constraint optimization engine"};
    app.require_subcommand(1);

    std::string file, stats_out, out_path, method = "td", tp_path;
    size_t k = 0;
    unsigned gen_k = 2;
    int processors = 1;
    bool use_fpt = false, ndjson = false, log_contraction = false, best = false;

    auto* solve = app.add_subcommand("solve", "solve optimization problems");
    solve->require_subcommand(1);
    auto* solve_max = solve->add_subcommand("max", "certified Max");
    solve_max->add_option("file", file)->required();
    solve_max->add_flag("--fpt", use_fpt, "iterate over svf(F) for flat valuations");
    auto* solve_topk = solve->add_subcommand("topk", "ranked Top-K stream");
    solve_topk->add_option("file", file)->required();
    solve_topk->add_option("-k", k, "number of solutions");
    solve_topk->add_flag("--ndjson", ndjson, "stream one record per line");

    auto* consistency = app.add_subcommand("consistency", "consistency algorithms");
    consistency->require_subcommand(1);
    auto* pairwise = consistency->add_subcommand("pairwise", "pairwise-consistency fixpoint");
    pairwise->add_option("file", file)->required();
    auto* global = consistency->add_subcommand("global", "parallel GLOBAL-CONSISTENCY");
    global->add_option("file", file)->required();
    global->add_option("--processors", processors);
    global->add_option("--stats-out", stats_out);

    auto* parallel = app.add_subcommand("parallel", "parallel DB-machine algorithms");
    parallel->require_subcommand(1);
    auto* pacq = parallel->add_subcommand("acq", "annotated best-solution relation");
    pacq->add_option("file", file)->required();
    pacq->add_option("--processors", processors);
    pacq->add_option("--stats-out", stats_out);
    pacq->add_flag("--log-contraction", log_contraction);
    pacq->add_flag("--best", best, "also extract one best solution");

    auto* oracle = app.add_subcommand("oracle", "brute-force reference answers");
    oracle->require_subcommand(1);
    auto* omax = oracle->add_subcommand("max");
    omax->add_option("file", file)->required();
    auto* otopk = oracle->add_subcommand("topk");
    otopk->add_option("file", file)->required();
    otopk->add_option("-k", k);
    auto* osol = oracle->add_subcommand("solutions");
    osol->add_option("file", file)->required();

    auto* views = app.add_subcommand("views", "view generation");
    views->require_subcommand(1);
    auto* generate = views->add_subcommand("generate");
    generate->add_option("file", file)->required();
    generate->add_option("--method", method)->check(CLI::IsMember({"td", "ghw"}));
    generate->add_option("-k", gen_k);
    generate->add_option("-o", out_path)->required();

    auto* check = app.add_subcommand("check", "structural checks");
    check->require_subcommand(1);
    auto* emb = check->add_subcommand("embedding");
    emb->add_option("file", file)->required();
    emb->add_option("--tree-projection", tp_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (solve_max->parsed())
            return cmd_solve_max(file, use_fpt);
        if (solve_topk->parsed())
            return cmd_solve_topk(file, k, ndjson);
        if (pairwise->parsed())
            return cmd_consistency_pairwise(file);
        if (global->parsed())
            return cmd_consistency_global(file, processors, stats_out);
        if (pacq->parsed())
            return cmd_parallel_acq(file, processors, stats_out, log_contraction, best);
        if (omax->parsed())
            return cmd_oracle("max", file, k);
        if (otopk->parsed())
            return cmd_oracle("topk", file, k);
        if (osol->parsed())
            return cmd_oracle("solutions", file, k);
        if (generate->parsed())
            return cmd_views_generate(file, method, gen_k, out_path);
        if (emb->parsed())
            return cmd_check_embedding(file, tp_path);
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const OracleTooLarge& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ParameterBudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

} // namespace treeproj
