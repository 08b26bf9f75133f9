// views.hpp - view sets, legal view databases, decomposition-method view
// generators, sandwich-formula materialization
#pragma once

#include "treeproj/model.hpp"
#include "treeproj/oracle.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace treeproj {

struct ViewSet {
    std::vector<Atom> views; // canonical order; includes all base views
    std::map<std::string, std::string> base_view_of; // atom symbol -> base view symbol

    bool is_base(const std::string& view_symbol) const;
    const Atom& view(const std::string& symbol) const;
};

struct ViewDatabase {
    std::map<std::string, Relation> relations;
};

/// Atoms over view symbols whose hypergraph is a tree projection of the
/// instance hypergraph w.r.t. the view hypergraph.
struct SandwichFormula {
    std::vector<Atom> atoms;
};

struct ViewBudgets {
    size_t max_tuples_per_relation = 200000;
    size_t max_views = 20000;
};

/// One view per atom with the relation copied from the constraint database
/// (the tightest legal choice).
std::pair<ViewSet, ViewDatabase> make_base_views(const CspInstance& inst);

/// Legality: base views at least as restrictive as their atoms, and no view
/// more restrictive than the projected solution set.
bool check_legal(const ViewSet& v, const ViewDatabase& vdb, const CspInstance& inst,
                 const OracleBudget& budget = {});

/// V_k: base views plus one view per variable set of size <= k+1, holding the
/// full product of active domains.
std::pair<ViewSet, ViewDatabase> gen_tree_decomposition_views(const CspInstance& inst, unsigned k,
                                                              const ViewBudgets& budgets = {});

/// h-V_k: one view per subformula of <= k distinct atoms, holding the join of
/// the member relations (k=1 gives exactly the base views).
std::pair<ViewSet, ViewDatabase> gen_ghw_views(const CspInstance& inst, unsigned k,
                                               const ViewBudgets& budgets = {});

/// Project the view database onto the sandwich atoms, intersecting the
/// projections of all covering views.
CspInstance materialize_sandwich(const SandwichFormula& sf, const ViewSet& v,
                                 const ViewDatabase& vdb);

Hypergraph view_hypergraph(const ViewSet& v);

/// Active domain per variable, computed from the base-view relations.
std::map<std::string, std::vector<Tok>> view_active_domains(const ViewSet& v,
                                                            const ViewDatabase& vdb);

} // namespace treeproj
