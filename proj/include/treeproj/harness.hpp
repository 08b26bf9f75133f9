// harness.hpp - instance file format, configuration, result serialization,
// CLI entry point
#pragma once

#include "treeproj/maxsolver.hpp"
#include "treeproj/model.hpp"
#include "treeproj/oracle.hpp"
#include "treeproj/parallel.hpp"
#include "treeproj/valuation.hpp"
#include "treeproj/views.hpp"

#include <optional>
#include <string>

namespace treeproj {

struct Budgets {
    ViewBudgets views;
    OracleBudget oracle;
    size_t fpt_parameter = 8;

    /// Apply the TREEPROJ_BUDGET environment override, when set.
    static Budgets from_environment();
};

struct ViewSpec {
    enum class Kind { Generator, Explicit };
    Kind kind = Kind::Generator;
    // generator
    std::string method = "td"; // td | ghw
    unsigned k = 2;
    // explicit
    ViewSet views;
    ViewDatabase vdb;
};

struct ParsedInstance {
    CspInstance instance;
    std::map<std::string, std::vector<std::string>> declared_domains; // optional
    ViewSpec view_spec;
    std::optional<StructuredValuation> valuation;
    std::optional<FlatValuation> flat;
    VarSet output;
    bool minimize = false; // min-sum shim: weights negated on the way in and out
    size_t topk = 1;
};

ParsedInstance parse_instance(const std::string& path);
ParsedInstance parse_instance_text(const std::string& text);
std::string serialize_instance(const ParsedInstance& pi);

/// Structured valuation for solving (min-sum shim applied when requested).
StructuredValuation solving_valuation(const ParsedInstance& pi);
std::optional<FlatValuation> solving_flat(const ParsedInstance& pi);

std::pair<ViewSet, ViewDatabase> resolve_views(const ParsedInstance& pi, const Budgets& budgets);

std::string outcome_to_json(const SolveOutcome& out, bool minimize);
std::string stats_to_json(const MachineStats& stats);

// exit codes: 0 solution, 2 no solution, 3 fail, 64 usage/schema, 65 budget
int run_cli(int argc, const char* const* argv);

} // namespace treeproj
