// views.cpp
#include "treeproj/views.hpp"

#include "treeproj/errors.hpp"

#include <algorithm>
#include <functional>

namespace treeproj {

bool ViewSet::is_base(const std::string& view_symbol) const {
    for (const auto& [atom, view] : base_view_of)
        if (view == view_symbol)
            return true;
    return false;
}

const Atom& ViewSet::view(const std::string& symbol) const {
    for (const auto& a : views)
        if (a.symbol == symbol)
            return a;
    throw Error("unknown view: " + symbol);
}

std::pair<ViewSet, ViewDatabase> make_base_views(const CspInstance& inst) {
    ViewSet vs;
    ViewDatabase vdb;
    for (const auto& a : inst.formula) {
        Atom w;
        w.symbol = "w[" + a.symbol + "]";
        w.scope = a.scope; // identical variable list
        vs.base_view_of.emplace(a.symbol, w.symbol);
        vdb.relations.emplace(w.symbol, inst.rel(a));
        vs.views.push_back(std::move(w));
    }
    return {std::move(vs), std::move(vdb)};
}

bool check_legal(const ViewSet& v, const ViewDatabase& vdb, const CspInstance& inst,
                 const OracleBudget& budget) {
    // (i) base views no looser than their atoms
    for (const auto& a : inst.formula) {
        auto it = v.base_view_of.find(a.symbol);
        if (it == v.base_view_of.end())
            return false;
        const Relation& wrel = vdb.relations.at(it->second);
        const Relation& qrel = inst.rel(a);
        if (wrel.scope != qrel.scope)
            return false;
        for (const auto& row : wrel.rows)
            if (!qrel.contains(row))
                return false;
    }
    // (ii) no view tighter than the projected solutions
    SolutionSet sols = brute_force_solutions(inst, budget);
    for (const auto& w : v.views) {
        const Relation& wrel = vdb.relations.at(w.symbol);
        for (const auto& theta : sols.solutions) {
            std::vector<Tok> row;
            row.reserve(w.scope.size());
            for (const auto& var : w.scope)
                row.push_back(tok(theta.at(var)));
            if (!wrel.contains(row))
                return false;
        }
    }
    return true;
}

std::map<std::string, std::vector<Tok>> view_active_domains(const ViewSet& v,
                                                            const ViewDatabase& vdb) {
    std::map<std::string, std::vector<Tok>> dom;
    for (const auto& [atom, view] : v.base_view_of) {
        const Atom& w = v.view(view);
        const Relation& r = vdb.relations.at(view);
        for (const auto& var : w.scope) {
            auto vals = column_values(r, var);
            auto [it, fresh] = dom.emplace(var, vals);
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

std::pair<ViewSet, ViewDatabase> gen_tree_decomposition_views(const CspInstance& inst, unsigned k,
                                                              const ViewBudgets& budgets) {
    if (k < 1)
        throw PreconditionViolated("tree decomposition views require k >= 1");
    auto [vs, vdb] = make_base_views(inst);
    auto dom = view_active_domains(vs, vdb);

    std::vector<std::string> vars;
    for (const auto& [var, d] : dom)
        vars.push_back(var);

    std::vector<std::vector<std::string>> subsets;
    std::vector<std::string> current;
    std::function<void(size_t)> enumerate = [&](size_t from) {
        if (!current.empty())
            subsets.push_back(current);
        if (current.size() == static_cast<size_t>(k) + 1)
            return;
        for (size_t i = from; i < vars.size(); ++i) {
            current.push_back(vars[i]);
            enumerate(i + 1);
            current.pop_back();
        }
    };
    enumerate(0);

    for (const auto& s : subsets) {
        if (vs.views.size() + 1 > budgets.max_views)
            throw BudgetExceeded("tree decomposition views: view-count budget exceeded");
        unsigned long long tuples = 1;
        for (const auto& var : s) {
            tuples *= std::max<unsigned long long>(1, dom.at(var).size());
            if (tuples > budgets.max_tuples_per_relation)
                throw BudgetExceeded("tree decomposition views: relation-size budget exceeded");
        }
        Atom w;
        w.scope = s;
        w.symbol = "wtd[";
        for (size_t i = 0; i < s.size(); ++i)
            w.symbol += (i ? "," : "") + s[i];
        w.symbol += "]";

        Relation r = Relation::unit();
        for (const auto& var : s)
            r = cross_with_column(r, var, dom.at(var));
        vdb.relations.emplace(w.symbol, std::move(r));
        vs.views.push_back(std::move(w));
    }
    return {std::move(vs), std::move(vdb)};
}

std::pair<ViewSet, ViewDatabase> gen_ghw_views(const CspInstance& inst, unsigned k,
                                               const ViewBudgets& budgets) {
    if (k < 1)
        throw PreconditionViolated("generalized hypertree views require k >= 1");
    auto [vs, vdb] = make_base_views(inst);

    std::vector<size_t> current;
    std::function<void(size_t)> enumerate = [&](size_t from) {
        if (current.size() >= 2) {
            if (vs.views.size() + 1 > budgets.max_views)
                throw BudgetExceeded("ghw views: view-count budget exceeded");
            Relation r = inst.rel(inst.formula[current[0]]);
            for (size_t i = 1; i < current.size(); ++i) {
                r = join(r, inst.rel(inst.formula[current[i]]));
                if (r.size() > budgets.max_tuples_per_relation)
                    throw BudgetExceeded("ghw views: relation-size budget exceeded");
            }
            Atom w;
            w.scope = r.scope;
            w.symbol = "wghw[";
            for (size_t i = 0; i < current.size(); ++i)
                w.symbol += (i ? "," : "") + inst.formula[current[i]].symbol;
            w.symbol += "]";
            vdb.relations.emplace(w.symbol, std::move(r));
            vs.views.push_back(std::move(w));
        }
        if (current.size() == static_cast<size_t>(k))
            return;
        for (size_t i = from; i < inst.formula.size(); ++i) {
            current.push_back(i);
            enumerate(i + 1);
            current.pop_back();
        }
    };
    enumerate(0);
    return {std::move(vs), std::move(vdb)};
}

CspInstance materialize_sandwich(const SandwichFormula& sf, const ViewSet& v,
                                 const ViewDatabase& vdb) {
    CspInstance out;
    for (const auto& a : sf.atoms) {
        VarSet need(a.scope.begin(), a.scope.end());
        Relation acc;
        bool first = true;
        for (const auto& w : v.views) {
            VarSet wvars(w.scope.begin(), w.scope.end());
            if (!std::includes(wvars.begin(), wvars.end(), need.begin(), need.end()))
                continue;
            Relation proj = project(vdb.relations.at(w.symbol), need);
            if (first) {
                acc = std::move(proj);
                first = false;
            } else {
                std::vector<std::vector<Tok>> inter;
                std::set_intersection(acc.rows.begin(), acc.rows.end(), proj.rows.begin(),
                                      proj.rows.end(), std::back_inserter(inter));
                acc.rows = std::move(inter);
            }
        }
        if (first)
            throw UncoveredAtom("materialize_sandwich: no view covers atom " + a.symbol);
        // reorder columns to the atom's scope order
        Relation final_rel = Relation::empty(a.scope);
        std::vector<int> idx;
        for (const auto& var : a.scope)
            idx.push_back(acc.col(var));
        for (const auto& row : acc.rows) {
            std::vector<Tok> r;
            r.reserve(idx.size());
            for (int c : idx)
                r.push_back(row[static_cast<size_t>(c)]);
            final_rel.rows.push_back(std::move(r));
        }
        final_rel.normalize();
        out.database.emplace(a.symbol, std::move(final_rel));
        out.formula.push_back(a);
    }
    return out;
}

Hypergraph view_hypergraph(const ViewSet& v) { return hypergraph_of(v.views); }

} // namespace treeproj
