// harness.cpp - file format, validation, CLI pipelines
#include "treeproj/harness.hpp"

#include "treeproj/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace treeproj {

using nlohmann::json;

namespace {

const std::string kReservedChars = "@%|[],";

void validate_name(const std::string& name, const char* what) {
    if (name.empty())
        throw SchemaError(std::string(what) + ": empty name");
    for (char c : name)
        if (kReservedChars.find(c) != std::string::npos || std::isspace(static_cast<unsigned char>(c)))
            throw SchemaError(std::string(what) + " '" + name + "' uses a reserved character");
}

void validate_value(const std::string& value) {
    if (value.empty())
        throw SchemaError("empty value token");
    if (value.find('%') != std::string::npos || value.find('|') != std::string::npos)
        throw SchemaError("value token '" + value + "' uses a reserved character");
}



WeightFunction parse_weight_function(const json& j) {
    if (!j.is_object())
        throw SchemaError("weight function must be an object");
    std::string kind = j.value("kind", "");
    std::string name = j.value("name", "");
    WeightFunction f;
    if (kind == "identity") {
        std::string var = j.at("var").get<std::string>();
        validate_name(var, "variable");
        f = WeightFunction::identity(var);
        if (!name.empty())
            f.name = name;
    } else if (kind == "constant") {
        if (name.empty())
            throw SchemaError("constant weight function needs a name");
        f = WeightFunction::constant_fn(name,
                                        Weight::finite(parse_rational(j.at("weight").get<std::string>())));
    } else if (kind == "table") {
        if (name.empty())
            throw SchemaError("table weight function needs a name");
        VarSet vars;
        for (const auto& v : j.at("scope")) {
            validate_name(v.get<std::string>(), "variable");
            vars.insert(v.get<std::string>());
        }
        std::map<std::vector<std::string>, Weight> entries;
        for (const auto& e : j.at("entries")) {
            std::vector<std::string> key;
            for (const auto& v : e.at("tuple"))
                key.push_back(v.get<std::string>());
            if (key.size() != vars.size())
                throw SchemaError("table entry arity mismatch in function " + name);
            entries[key] = Weight::finite(parse_rational(e.at("weight").get<std::string>()));
        }
        f = WeightFunction::table_fn(name, std::move(vars), std::move(entries));
    } else {
        throw SchemaError("unknown weight function kind: '" + kind + "'");
    }
    return f;
}

json weight_function_to_json(const WeightFunction& f) {
    json j;
    j["name"] = f.name;
    switch (f.body) {
    case WeightFunction::Body::Identity:
        j["kind"] = "identity";
        j["var"] = f.identity_var;
        break;
    case WeightFunction::Body::Constant:
        j["kind"] = "constant";
        j["weight"] = f.constant.to_token();
        break;
    case WeightFunction::Body::Table: {
        j["kind"] = "table";
        j["scope"] = json::array();
        for (const auto& v : f.vars)
            j["scope"].push_back(v);
        j["entries"] = json::array();
        for (const auto& [key, w] : f.table) {
            json e;
            e["tuple"] = key;
            e["weight"] = w.to_token();
            j["entries"].push_back(e);
        }
        break;
    }
    }
    return j;
}

// expression tree: {"op","left","right"} internal, {"function": {...}} leaf
int parse_expr(const json& j, StructuredValuation& sv) {
    if (j.contains("function")) {
        WeightFunction f = parse_weight_function(j.at("function"));
        sv.functions.push_back(std::move(f));
        sv.nodes.push_back(StructuredValuation::Node{true, static_cast<int>(sv.functions.size()) - 1,
                                                     OperatorKind::Sum, -1, -1});
        return static_cast<int>(sv.nodes.size()) - 1;
    }
    if (!j.contains("op"))
        throw SchemaError("valuation node needs 'op' or 'function'");
    OperatorKind op = operator_from_name(j.at("op").get<std::string>());
    int l = parse_expr(j.at("left"), sv);
    int r = parse_expr(j.at("right"), sv);
    sv.nodes.push_back(StructuredValuation::Node{false, -1, op, l, r});
    return static_cast<int>(sv.nodes.size()) - 1;
}

json expr_to_json(const StructuredValuation& sv, int node) {
    const auto& n = sv.nodes[static_cast<size_t>(node)];
    json j;
    if (n.leaf) {
        j["function"] = weight_function_to_json(sv.functions[static_cast<size_t>(n.func)]);
        return j;
    }
    j["op"] = operator_name(n.op);
    j["left"] = expr_to_json(sv, n.left);
    j["right"] = expr_to_json(sv, n.right);
    return j;
}

Relation parse_relation(const json& j, const std::vector<std::string>& scope, const char* what) {
    Relation r = Relation::empty(scope);
    for (const auto& row : j) {
        if (row.size() != scope.size())
            throw SchemaError(std::string(what) + ": tuple arity mismatch");
        std::vector<std::string> values;
        for (const auto& v : row) {
            values.push_back(v.get<std::string>());
            validate_value(values.back());
        }
        r.add_row(values);
    }
    r.normalize();
    return r;
}

std::map<std::string, std::vector<Tok>> instance_active_domains(const CspInstance& inst) {
    std::map<std::string, std::vector<Tok>> dom;
    for (const auto& a : inst.formula) {
        const Relation& r = inst.rel(a);
        for (const auto& v : a.scope) {
            auto vals = column_values(r, v);
            auto [it, fresh] = dom.emplace(v, vals);
            if (!fresh) {
                std::vector<Tok> merged;
                std::set_union(it->second.begin(), it->second.end(), vals.begin(), vals.end(),
                               std::back_inserter(merged));
                it->second = std::move(merged);
            }
        }
    }
    return dom;
}

void validate_valuation(const ParsedInstance& pi) {
    const StructuredValuation sv = pi.valuation ? *pi.valuation
                                                : (pi.flat ? pi.flat->to_structured()
                                                           : throw SchemaError("no valuation given"));
    VarSet inst_vars = pi.instance.variables();
    for (const auto& f : sv.functions)
        for (const auto& v : f.vars)
            if (!inst_vars.count(v))
                throw SchemaError("weight function " + f.name + " uses unknown variable " + v);

    auto doms = instance_active_domains(pi.instance);
    bool has_product = false;
    for (const auto& n : sv.nodes)
        if (!n.leaf && n.op == OperatorKind::Product)
            has_product = true;
    if (pi.flat && pi.flat->op == OperatorKind::Product)
        has_product = true;

    auto check_weight = [&](const Weight& w, const std::string& fname) {
        if (has_product && w.is_finite() && w.value() < 0)
            throw SchemaError("weight function " + fname +
                              ": product valuations require non-negative weights");
    };
    for (const auto& f : sv.functions) {
        switch (f.body) {
        case WeightFunction::Body::Constant:
            check_weight(f.constant, f.name);
            break;
        case WeightFunction::Body::Identity: {
            for (Tok t : doms.at(f.identity_var)) {
                Weight w;
                try {
                    w = Weight::finite(parse_rational(tok_str(t)));
                } catch (const NonNumericToken&) {
                    throw SchemaError("identity weight function " + f.name +
                                      ": non-numeric domain token '" + tok_str(t) + "'");
                }
                check_weight(w, f.name);
            }
            break;
        }
        case WeightFunction::Body::Table: {
            // the table must cover the product of active domains
            std::vector<std::string> vars(f.vars.begin(), f.vars.end());
            std::vector<std::string> key(vars.size());
            std::function<void(size_t)> walk = [&](size_t i) {
                if (i == vars.size()) {
                    auto it = f.table.find(key);
                    if (it == f.table.end())
                        throw SchemaError("table weight function " + f.name +
                                          " misses an active-domain assignment");
                    check_weight(it->second, f.name);
                    return;
                }
                for (Tok t : doms.at(vars[i])) {
                    key[i] = tok_str(t);
                    walk(i + 1);
                }
            };
            walk(0);
            break;
        }
        }
    }

    if (pi.minimize) {
        for (const auto& n : sv.nodes)
            if (!n.leaf && n.op != OperatorKind::Sum)
                throw SchemaError("direction min-sum supports the sum operator only");
        if (pi.flat && pi.flat->op != OperatorKind::Sum)
            throw SchemaError("direction min-sum supports the sum operator only");
    }
}

} // namespace

Budgets Budgets::from_environment() {
    Budgets b;
    if (const char* env = std::getenv("TREEPROJ_BUDGET")) {
        try {
            unsigned long long v = std::stoull(env);
            b.views.max_tuples_per_relation = v;
            b.views.max_views = v;
            b.oracle.max_candidates = v;
        } catch (const std::exception&) {
            throw SchemaError("TREEPROJ_BUDGET must be a non-negative integer");
        }
    }
    return b;
}

ParsedInstance parse_instance_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("json parse error: ") + e.what());
    }

    ParsedInstance pi;
    if (j.contains("variables") && !j.at("variables").is_null()) {
        for (const auto& [var, dom] : j.at("variables").items()) {
            validate_name(var, "variable");
            std::vector<std::string> values;
            if (dom.is_array())
                for (const auto& v : dom) {
                    values.push_back(v.get<std::string>());
                    validate_value(values.back());
                }
            pi.declared_domains.emplace(var, std::move(values));
        }
    }

    if (!j.contains("constraints") || j.at("constraints").empty())
        throw SchemaError("instance needs a non-empty 'constraints' array");
    for (const auto& c : j.at("constraints")) {
        Atom a;
        a.symbol = c.at("name").get<std::string>();
        validate_name(a.symbol, "constraint");
        if (pi.instance.database.count(a.symbol))
            throw SchemaError("duplicate constraint name: " + a.symbol);
        std::set<std::string> seen;
        for (const auto& v : c.at("scope")) {
            std::string var = v.get<std::string>();
            validate_name(var, "variable");
            if (!seen.insert(var).second)
                throw SchemaError("constraint " + a.symbol + ": repeated variable " + var);
            if (!pi.declared_domains.empty() && !pi.declared_domains.count(var))
                throw SchemaError("constraint " + a.symbol + ": undeclared variable " + var);
            a.scope.push_back(var);
        }
        if (a.scope.empty())
            throw SchemaError("constraint " + a.symbol + ": empty scope");
        Relation r = parse_relation(c.at("tuples"), a.scope, a.symbol.c_str());
        if (!pi.declared_domains.empty()) {
            for (size_t col = 0; col < a.scope.size(); ++col) {
                const auto& declared = pi.declared_domains.at(a.scope[col]);
                if (declared.empty())
                    continue; // declared without fixed domain
                for (const auto& row : r.rows) {
                    const std::string& val = tok_str(row[col]);
                    if (std::find(declared.begin(), declared.end(), val) == declared.end())
                        throw SchemaError("constraint " + a.symbol + ": value '" + val +
                                          "' outside the declared domain of " + a.scope[col]);
                }
            }
        }
        pi.instance.database.emplace(a.symbol, std::move(r));
        pi.instance.formula.push_back(std::move(a));
    }

    if (j.contains("views")) {
        const json& v = j.at("views");
        if (v.contains("generator")) {
            pi.view_spec.kind = ViewSpec::Kind::Generator;
            pi.view_spec.method = v.at("generator").at("method").get<std::string>();
            if (pi.view_spec.method != "td" && pi.view_spec.method != "ghw")
                throw SchemaError("views.generator.method must be 'td' or 'ghw'");
            pi.view_spec.k = v.at("generator").at("k").get<unsigned>();
            if (pi.view_spec.k < 1)
                throw SchemaError("views.generator.k must be >= 1");
        } else if (v.contains("explicit")) {
            pi.view_spec.kind = ViewSpec::Kind::Explicit;
            const json& ex = v.at("explicit");
            for (const auto& w : ex.at("views")) {
                Atom a;
                a.symbol = w.at("name").get<std::string>();
                for (const auto& s : w.at("scope"))
                    a.scope.push_back(s.get<std::string>());
                Relation r = parse_relation(w.at("tuples"), a.scope, a.symbol.c_str());
                pi.view_spec.vdb.relations.emplace(a.symbol, std::move(r));
                pi.view_spec.views.views.push_back(std::move(a));
            }
            for (const auto& [atom, view] : ex.at("base_map").items())
                pi.view_spec.views.base_view_of.emplace(atom, view.get<std::string>());
            // every atom needs a base view with the identical variable list
            for (const auto& a : pi.instance.formula) {
                auto it = pi.view_spec.views.base_view_of.find(a.symbol);
                if (it == pi.view_spec.views.base_view_of.end())
                    throw SchemaError("explicit views: no base view for constraint " + a.symbol);
                const Atom& w = pi.view_spec.views.view(it->second);
                if (w.scope != a.scope)
                    throw SchemaError("explicit views: base view of " + a.symbol +
                                      " must share its variable list");
            }
        } else {
            throw SchemaError("views needs 'generator' or 'explicit'");
        }
    }

    if (j.contains("valuation")) {
        StructuredValuation sv;
        sv.root = parse_expr(j.at("valuation"), sv);
        pi.valuation = std::move(sv);
    }
    if (j.contains("flat_valuation")) {
        FlatValuation fv;
        fv.op = operator_from_name(j.at("flat_valuation").at("op").get<std::string>());
        for (const auto& f : j.at("flat_valuation").at("functions"))
            fv.functions.push_back(parse_weight_function(f));
        if (fv.functions.empty())
            throw SchemaError("flat_valuation needs at least one function");
        pi.flat = std::move(fv);
    }
    if (pi.valuation && pi.flat)
        throw SchemaError("give either 'valuation' or 'flat_valuation', not both");

    if (j.contains("output")) {
        VarSet inst_vars = pi.instance.variables();
        for (const auto& v : j.at("output")) {
            std::string var = v.get<std::string>();
            if (!inst_vars.count(var))
                throw SchemaError("output variable " + var + " does not occur in the constraints");
            pi.output.insert(var);
        }
    }

    std::string direction = j.value("direction", "max");
    if (direction == "max") {
        pi.minimize = false;
    } else if (direction == "min-sum") {
        pi.minimize = true;
    } else {
        throw SchemaError("direction must be 'max' or 'min-sum'");
    }

    pi.topk = j.value("k", 1u);
    if (pi.topk < 1)
        throw SchemaError("k must be >= 1");

    if (pi.valuation || pi.flat)
        validate_valuation(pi);
    return pi;
}

ParsedInstance parse_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_instance_text(buf.str());
}

std::string serialize_instance(const ParsedInstance& pi) {
    json j;
    if (!pi.declared_domains.empty()) {
        j["variables"] = json::object();
        for (const auto& [var, dom] : pi.declared_domains)
            j["variables"][var] = dom;
    }
    j["constraints"] = json::array();
    for (const auto& a : pi.instance.formula) {
        json c;
        c["name"] = a.symbol;
        c["scope"] = a.scope;
        c["tuples"] = json::array();
        const Relation& r = pi.instance.rel(a);
        for (size_t i = 0; i < r.rows.size(); ++i)
            c["tuples"].push_back(r.row_strings(i));
        // canonical order for cross-process stability
        std::sort(c["tuples"].begin(), c["tuples"].end());
        j["constraints"].push_back(std::move(c));
    }
    if (pi.view_spec.kind == ViewSpec::Kind::Generator) {
        j["views"]["generator"]["method"] = pi.view_spec.method;
        j["views"]["generator"]["k"] = pi.view_spec.k;
    } else {
        json ex;
        ex["views"] = json::array();
        for (const auto& w : pi.view_spec.views.views) {
            json v;
            v["name"] = w.symbol;
            v["scope"] = w.scope;
            v["tuples"] = json::array();
            const Relation& r = pi.view_spec.vdb.relations.at(w.symbol);
            for (size_t i = 0; i < r.rows.size(); ++i)
                v["tuples"].push_back(r.row_strings(i));
            std::sort(v["tuples"].begin(), v["tuples"].end());
            ex["views"].push_back(std::move(v));
        }
        ex["base_map"] = json::object();
        for (const auto& [atom, view] : pi.view_spec.views.base_view_of)
            ex["base_map"][atom] = view;
        j["views"]["explicit"] = std::move(ex);
    }
    if (pi.valuation)
        j["valuation"] = expr_to_json(*pi.valuation, pi.valuation->root);
    if (pi.flat) {
        j["flat_valuation"]["op"] = operator_name(pi.flat->op);
        j["flat_valuation"]["functions"] = json::array();
        for (const auto& f : pi.flat->functions)
            j["flat_valuation"]["functions"].push_back(weight_function_to_json(f));
    }
    if (!pi.output.empty())
        j["output"] = std::vector<std::string>(pi.output.begin(), pi.output.end());
    j["direction"] = pi.minimize ? "min-sum" : "max";
    j["k"] = pi.topk;
    return j.dump(2);
}

StructuredValuation solving_valuation(const ParsedInstance& pi) {
    StructuredValuation sv;
    if (pi.valuation)
        sv = *pi.valuation;
    else if (pi.flat)
        sv = pi.flat->to_structured();
    else
        throw SchemaError("instance has no valuation");
    if (pi.minimize)
        for (auto& f : sv.functions)
            f.negated = !f.negated;
    return sv;
}

std::optional<FlatValuation> solving_flat(const ParsedInstance& pi) {
    FlatValuation fv;
    if (pi.flat) {
        fv = *pi.flat;
    } else if (pi.valuation) {
        // flatten single-operator trees
        const auto& sv = *pi.valuation;
        std::optional<OperatorKind> op;
        for (const auto& n : sv.nodes)
            if (!n.leaf) {
                if (op && *op != n.op)
                    return std::nullopt;
                op = n.op;
            }
        fv.op = op.value_or(OperatorKind::Sum);
        fv.functions = sv.functions;
    } else {
        return std::nullopt;
    }
    if (pi.minimize)
        for (auto& f : fv.functions)
            f.negated = !f.negated;
    return fv;
}

std::pair<ViewSet, ViewDatabase> resolve_views(const ParsedInstance& pi, const Budgets& budgets) {
    if (pi.view_spec.kind == ViewSpec::Kind::Explicit)
        return {pi.view_spec.views, pi.view_spec.vdb};
    if (pi.view_spec.method == "td")
        return gen_tree_decomposition_views(pi.instance, pi.view_spec.k, budgets.views);
    return gen_ghw_views(pi.instance, pi.view_spec.k, budgets.views);
}

namespace {

Weight present_weight(const Weight& w, bool minimize) { return minimize ? w.negated() : w; }

json assignment_to_json(const Assignment& a) {
    json j = json::object();
    for (const auto& [var, val] : a.bindings)
        j[var] = val;
    return j;
}

} // namespace

std::string outcome_to_json(const SolveOutcome& out, bool minimize) {
    json j;
    switch (out.status) {
    case SolveOutcome::Status::Solution:
        j["status"] = "solution";
        j["assignment"] = assignment_to_json(out.assignment);
        j["weight"] = present_weight(out.weight, minimize).to_token();
        j["certified"] = out.certified;
        break;
    case SolveOutcome::Status::NoSolution:
        j["status"] = "no-solution";
        break;
    case SolveOutcome::Status::Fail:
        j["status"] = "fail";
        j["fail_reason"] = out.fail_reason;
        break;
    }
    return j.dump();
}

std::string stats_to_json(const MachineStats& stats) {
    json j;
    j["processors"] = stats.processors;
    j["parallel_steps"] = stats.parallel_steps;
    j["ascending_steps"] = stats.ascending_steps;
    j["descending_steps"] = stats.descending_steps;
    j["shunt_count"] = stats.shunt_count;
    j["max_relation_size"] = stats.max_relation_size;
    j["max_weight_magnitude"] = rational_to_string(stats.max_weight_magnitude);
    return j.dump();
}

} // namespace treeproj
