// oracle.cpp
#include "treeproj/oracle.hpp"

#include "treeproj/errors.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace treeproj {

namespace {

// Active domain per variable: intersection over the atoms containing it of
// that atom's column values (complete, since solutions match every atom).
std::map<std::string, std::vector<Tok>> active_domains(const CspInstance& inst) {
    std::map<std::string, std::vector<Tok>> dom;
    for (const auto& a : inst.formula) {
        const Relation& r = inst.rel(a);
        for (const auto& v : a.scope) {
            auto vals = column_values(r, v);
            auto it = dom.find(v);
            if (it == dom.end()) {
                dom.emplace(v, std::move(vals));
            } else {
                std::vector<Tok> inter;
                std::set_intersection(it->second.begin(), it->second.end(), vals.begin(),
                                      vals.end(), std::back_inserter(inter));
                it->second = std::move(inter);
            }
        }
    }
    return dom;
}

struct Searcher {
    const CspInstance& inst;
    const OracleBudget& budget;
    std::vector<std::string> vars;
    std::map<std::string, std::vector<Tok>> dom;
    std::map<std::string, std::vector<size_t>> ready_atoms; // atoms fully bound once var is set
    unsigned long long visited = 0;

    Searcher(const CspInstance& inst_, const OracleBudget& budget_, const Assignment& pinned)
        : inst(inst_), budget(budget_) {
        dom = active_domains(inst);
        unsigned long long space = 1;
        for (auto& [v, d] : dom) {
            if (pinned.binds(v)) {
                Tok t = tok(pinned.at(v));
                if (std::binary_search(d.begin(), d.end(), t))
                    d = {t};
                else
                    d = {};
            }
            vars.push_back(v);
            space = space * std::max<unsigned long long>(1, d.size());
            if (space > budget.max_candidates)
                throw OracleTooLarge("oracle: search space exceeds candidate budget");
        }
        // atom becomes checkable at the last of its variables in `vars` order
        std::map<std::string, size_t> pos;
        for (size_t i = 0; i < vars.size(); ++i)
            pos.emplace(vars[i], i);
        for (size_t ai = 0; ai < inst.formula.size(); ++ai) {
            size_t last = 0;
            for (const auto& v : inst.formula[ai].scope)
                last = std::max(last, pos.at(v));
            if (!inst.formula[ai].scope.empty())
                ready_atoms[vars[last]].push_back(ai);
        }
    }

    bool atom_ok(size_t ai, const std::map<std::string, Tok>& bound) const {
        const Atom& a = inst.formula[ai];
        std::vector<Tok> row;
        row.reserve(a.scope.size());
        for (const auto& v : a.scope)
            row.push_back(bound.at(v));
        return inst.rel(a).contains(row);
    }

    // visit(theta) -> keep going?
    bool search(const std::function<bool(const Assignment&)>& visit) {
        std::map<std::string, Tok> bound;
        std::function<bool(size_t)> go = [&](size_t i) -> bool {
            if (++visited > budget.max_candidates * 4)
                throw OracleTooLarge("oracle: backtracking budget exhausted");
            if (i == vars.size()) {
                Assignment theta;
                for (const auto& [v, t] : bound)
                    theta.bindings.emplace(v, tok_str(t));
                return visit(theta);
            }
            const auto& d = dom.at(vars[i]);
            for (Tok t : d) {
                bound[vars[i]] = t;
                bool ok = true;
                auto it = ready_atoms.find(vars[i]);
                if (it != ready_atoms.end())
                    for (size_t ai : it->second)
                        if (!atom_ok(ai, bound)) {
                            ok = false;
                            break;
                        }
                if (ok && !go(i + 1))
                    return false;
            }
            bound.erase(vars[i]);
            return true;
        };
        return go(0);
    }
};

} // namespace

SolutionSet brute_force_solutions(const CspInstance& inst, const OracleBudget& budget) {
    SolutionSet out;
    Searcher s(inst, budget, Assignment{});
    s.search([&](const Assignment& theta) {
        out.solutions.push_back(theta);
        return true;
    });
    std::sort(out.solutions.begin(), out.solutions.end());
    return out;
}

std::optional<Assignment> oracle_extend(const CspInstance& inst, const Assignment& theta,
                                        const OracleBudget& budget) {
    // theta must itself be consistent with the atoms it fully binds
    std::optional<Assignment> found;
    Searcher s(inst, budget, theta);
    s.search([&](const Assignment& full) {
        found = full;
        return false;
    });
    return found;
}

Weight oracle_max_extension(const CspInstance& inst, const StructuredValuation& f,
                            const Assignment& theta, const OracleBudget& budget) {
    Weight best = Weight::bottom();
    Searcher s(inst, budget, theta);
    s.search([&](const Assignment& full) {
        best = weight_max(best, f.evaluate(full));
        return true;
    });
    return best;
}

namespace {

std::vector<std::pair<Assignment, Weight>> grouped_by_output(const CspInstance& inst,
                                                             const StructuredValuation& f,
                                                             const VarSet& o,
                                                             const OracleBudget& budget) {
    std::map<Assignment, Weight> groups;
    Searcher s(inst, budget, Assignment{});
    s.search([&](const Assignment& theta) {
        Weight w = f.evaluate(theta);
        Assignment key = theta.restrict_to(o);
        auto [it, fresh] = groups.emplace(key, w);
        if (!fresh)
            it->second = weight_max(it->second, w);
        return true;
    });
    std::vector<std::pair<Assignment, Weight>> out(groups.begin(), groups.end());
    // descending by weight, ties by lexicographically least assignment
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return b.second < a.second;
        return a.first < b.first;
    });
    return out;
}

} // namespace

OracleAnswer oracle_max(const CspInstance& inst, const StructuredValuation& f, const VarSet& o,
                        const OracleBudget& budget) {
    auto groups = grouped_by_output(inst, f, o, budget);
    OracleAnswer ans;
    if (groups.empty()) {
        ans.no_solution = true;
        return ans;
    }
    ans.assignment = groups.front().first;
    ans.weight = groups.front().second;
    return ans;
}

std::vector<std::pair<Assignment, Weight>> oracle_topk(const CspInstance& inst,
                                                       const StructuredValuation& f, const VarSet& o,
                                                       size_t k, const OracleBudget& budget) {
    auto groups = grouped_by_output(inst, f, o, budget);
    if (groups.size() > k)
        groups.resize(k);
    return groups;
}

} // namespace treeproj
