// parallel.hpp - simulated parallel DB-machine: shunt-based tree contraction
// for global consistency and best-solution computation over e-join trees
#pragma once

#include "treeproj/consistency.hpp"
#include "treeproj/model.hpp"
#include "treeproj/valuation.hpp"
#include "treeproj/weight.hpp"

#include <optional>
#include <vector>

namespace treeproj {

/// Relation whose tuples carry a weight; duplicate rows merge keeping the
/// maximum value.
struct AnnotatedRelation {
    std::vector<std::string> scope;
    std::vector<std::pair<std::vector<Tok>, Weight>> rows;

    static AnnotatedRelation from_relation(const Relation& r, const Weight& val);
    void normalize();
    size_t size() const { return rows.size(); }
    int col(const std::string& v) const;
};

AnnotatedRelation extended_join(const AnnotatedRelation& r1, const AnnotatedRelation& r2,
                                OperatorKind op);
AnnotatedRelation extended_project(const AnnotatedRelation& r, const VarSet& x);

/// Frozen copy of vertex s produced by a shunt, keyed by the step that marked
/// the pair; consumed by the matching r-shunt.
struct ShuntRecord {
    int step = 0;
    int l = -1, p = -1, s = -1, q = -1;
    int s_slot_in_p = 0; // where s sat among p's children
    int p_slot_in_q = 0; // where p sat among q's children
    VarSet s_scope;      // sch(s) before the shunt
    Relation s_rel;      // projection of C onto that scope
};

struct MachineStats {
    int processors = 1;
    unsigned long long parallel_steps = 0; // sum of ceil(batch/c) over half-steps
    unsigned long long ascending_steps = 0;
    unsigned long long descending_steps = 0;
    unsigned long long shunt_count = 0;
    size_t max_relation_size = 0;
    Rational max_weight_magnitude = 0;
};

struct MachineConfig {
    int processors = 1;
    /// Assert the Theorem-10 size bounds (|pi_ret| <= d, |pi_iet| <= d) after
    /// every shunt.
    bool check_bounds = false;
};

/// Single shunt(w) on unmarked leaf l: joins l, p (semijoined with q) and s,
/// re-parents s under q, marks l and p, stores s_w.
void shunt_gc(EJoinTree& t, int l, int w, std::vector<ShuntRecord>& store, MachineStats& stats,
              size_t d_bound, bool check_bounds);

/// Inverse step: unmarks the pair, restores the tree shape and computes the
/// consistent reducts of p and l.
void r_shunt(EJoinTree& t, const ShuntRecord& rec, MachineStats& stats);

/// GLOBAL-CONSISTENCY: ascending shunt contraction, root update, descending
/// r-shunt expansion. Output relations are the globally consistent reduct.
std::pair<CspInstance, MachineStats> global_consistency(const CspInstance& inst, const EJoinTree& t,
                                                        const MachineConfig& cfg = {});

/// Contraction log entry for the ACQ run (backs extract_one_best).
struct AcqLogEntry {
    bool final_step = false;
    int l = -1, p = -1, s = -1;
    AnnotatedRelation rel_l, rel_p, rel_s;
    VarSet new_s_scope;
    AnnotatedRelation new_s_rel; // final_step: the output relation over O
};

/// ACQ over a globally consistent instance: annotated contraction computing,
/// for every O-assignment, the best value of any full solution extending it.
std::pair<AnnotatedRelation, MachineStats> acq(const CspInstance& inst, const FlatValuation& f,
                                               const VarSet& o, const EJoinTree& t,
                                               const MachineConfig& cfg = {},
                                               std::vector<AcqLogEntry>* log = nullptr);

/// acq with O = {} followed by a top-down pass over the contraction log,
/// re-selecting tuples that attain the optimal value.
std::pair<Assignment, Weight> extract_one_best(const CspInstance& inst, const FlatValuation& f,
                                               const EJoinTree& t, const MachineConfig& cfg = {});

} // namespace treeproj
