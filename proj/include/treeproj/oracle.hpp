// oracle.hpp - brute-force reference implementations backing derived test
// values and property checks
#pragma once

#include "treeproj/model.hpp"
#include "treeproj/valuation.hpp"

#include <optional>
#include <vector>

namespace treeproj {

struct SolutionSet {
    std::vector<Assignment> solutions; // duplicate-free, canonically ordered
    std::vector<Weight> weights;       // optional, parallel to solutions
};

struct OracleBudget {
    unsigned long long max_candidates = 1000000;
};

/// Exact Phi^DB via backtracking over active domains.
SolutionSet brute_force_solutions(const CspInstance& inst, const OracleBudget& budget = {});

struct OracleAnswer {
    bool no_solution = false;
    Assignment assignment; // over O
    Weight weight;
};

/// Best O-assignment under the descending order induced by F (ties broken by
/// lexicographically least assignment).
OracleAnswer oracle_max(const CspInstance& inst, const StructuredValuation& f, const VarSet& o,
                        const OracleBudget& budget = {});

/// Sorted Top-K prefix of the O-assignments with their best-extension weights.
std::vector<std::pair<Assignment, Weight>> oracle_topk(const CspInstance& inst,
                                                       const StructuredValuation& f, const VarSet& o,
                                                       size_t k, const OracleBudget& budget = {});

/// max_F(theta): best weight of any solution extending the partial assignment,
/// Bottom when none exists.
Weight oracle_max_extension(const CspInstance& inst, const StructuredValuation& f,
                            const Assignment& theta, const OracleBudget& budget = {});

/// One extension of theta to a full solution, if any (no weights involved).
std::optional<Assignment> oracle_extend(const CspInstance& inst, const Assignment& theta,
                                        const OracleBudget& budget = {});

} // namespace treeproj
