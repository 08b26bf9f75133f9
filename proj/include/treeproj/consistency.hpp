// consistency.hpp - pairwise-consistency fixpoint, sequential full reducer,
// global-consistency check, e-join-tree construction
#pragma once

#include "treeproj/model.hpp"
#include "treeproj/oracle.hpp"
#include "treeproj/views.hpp"

#include <cstdint>
#include <optional>

namespace treeproj {

/// Strictly binary annotated join tree. Vertices carry the scope partition
/// ret/iet (oet joins in for the parallel output-preserving algorithm), the
/// constraint relation, and contraction marks.
struct EJoinTree {
    struct Vertex {
        VarSet ret, iet, oet;
        Relation rel;
        std::optional<int> mark;
        int parent = -1;
        std::vector<int> children; // ordered; left child first
        std::optional<int> leaf_label;
        std::string atom; // source constraint symbol (duplicates share it)

        VarSet sch() const;
    };

    std::vector<Vertex> verts;
    int root = -1;

    size_t size() const { return verts.size(); }
    bool unmarked(int v) const { return !verts[static_cast<size_t>(v)].mark.has_value(); }
    /// Depth of the tree induced by the unmarked vertices.
    int unmarked_depth() const;
    /// Unmarked vertices with no unmarked child.
    std::vector<int> unmarked_leaves() const;
    int unmarked_parent(int v) const;
};

/// Greatest fixpoint of the semijoin rule over all ordered view pairs sharing
/// a variable. The processing order is immaterial (confluence); order_seed
/// shuffles it for the confluence tests. Returns the reduced database and
/// whether some relation became empty.
std::pair<ViewDatabase, bool> enforce_pairwise(const ViewSet& v, const ViewDatabase& vdb,
                                               std::optional<std::uint64_t> order_seed = {});

/// Low-level fixpoint over named relations (used by the solver): `participants`
/// select the relations, `sources` seed the worklist (empty = all pairs).
/// Returns true iff some participating relation is empty afterwards.
bool pairwise_fixpoint(std::map<std::string, Relation>& rels,
                       const std::vector<std::string>& participants,
                       const std::vector<std::string>& sources = {},
                       std::optional<std::uint64_t> order_seed = {});

/// Yannakakis-style full reducer: semijoin sweep leaves-to-root then
/// root-to-leaves along a witness join tree; output is the globally
/// consistent reduct.
CspInstance full_reduce_acyclic(const CspInstance& inst, const JoinTree& jt);

/// Oracle-backed: every tuple of every relation extends to a full solution.
bool is_globally_consistent(const CspInstance& inst, const OracleBudget& budget = {});

/// Strictly binary e-join tree with one vertex per constraint, ret = scope,
/// iet = oet = empty; binarization inserts duplicate-labeled vertices.
EJoinTree build_ejointree(const CspInstance& inst, const JoinTree& jt);

} // namespace treeproj
