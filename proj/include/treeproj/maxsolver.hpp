// maxsolver.hpp - the promise-free optimization core: ComputeMax, certified
// Max via depromisization, fixed-parameter Max over svf(F), Top-K streaming
#pragma once

#include "treeproj/consistency.hpp"
#include "treeproj/model.hpp"
#include "treeproj/valuation.hpp"
#include "treeproj/views.hpp"

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace treeproj {

/// A view augmented with one or two fresh weight variables. The relation
/// lives in the working database under `symbol`; weight columns hold weight
/// tokens or the noval sentinel.
struct AugmentedView {
    std::string symbol;
    std::string base; // base view symbol in V
    std::vector<std::string> weight_vars;
};

struct CandidateSeparatorSet {
    int node = -1; // parse-tree vertex
    std::vector<AugmentedView> candidates;
};

struct SolveOutcome {
    enum class Status { Solution, NoSolution, Fail };

    Status status = Status::Fail;
    Assignment assignment;
    Weight weight;
    bool certified = false;
    std::string fail_reason;

    static SolveOutcome make_solution(Assignment a, Weight w, bool cert);
    static SolveOutcome no_solution();
    static SolveOutcome fail(std::string reason);
    bool is_solution() const { return status == Status::Solution; }
};

/// Observation points used by the lemma-level property tests.
struct SolverHooks {
    /// Every candidate view built by an evaluate step (leaves included):
    /// parse vertex, base view symbol, relation with its weight column.
    std::function<void(int, const std::string&, const Relation&, const std::string&)> on_candidate;
    /// The surviving root view after the final evaluate.
    std::function<void(const Relation&, const std::string&)> on_root;
};

/// The noval sentinel token (never a valid weight token).
extern const char* const kNoval;

/// Algorithm ComputeMax: promise algorithm that never returns a wrong
/// NO SOLUTION and answers Max correctly whenever (F,O) embeds in a sandwich
/// of a homomorphically equivalent subformula.
SolveOutcome compute_max_promise(const CspInstance& inst, const StructuredValuation& f,
                                 const ViewSet& v, const ViewDatabase& vdb, const VarSet& o,
                                 const SolverHooks* hooks = nullptr);

/// Promise-free Max: fixes variables one at a time through ComputeMax and
/// verifies the assembled assignment against the original instance.
SolveOutcome certified_max(const CspInstance& inst, const StructuredValuation& f, const ViewSet& v,
                           const ViewDatabase& vdb, const VarSet& o,
                           const SolverHooks* hooks = nullptr);

struct FptOutcome {
    SolveOutcome outcome;
    size_t trees_explored = 0;
    std::optional<StructuredValuation> chosen;
};

/// Tries every structured form in svf(F) until one is not disproved.
FptOutcome fpt_max(const CspInstance& inst, const FlatValuation& f, const ViewSet& v,
                   const ViewDatabase& vdb, const VarSet& o, size_t parameter_budget = 8);

/// Lawler-scheme Top-K stream: emits distinct O-assignments in non-increasing
/// order; a Fail from any subproblem ends the stream, leaving everything
/// already emitted as a certified prefix.
class TopKStream {
public:
    struct Item {
        Assignment assignment;
        Weight weight;
    };

    TopKStream(const CspInstance& inst, const StructuredValuation& f, const ViewSet& v,
               const ViewDatabase& vdb, const VarSet& o, size_t k);

    std::optional<Item> next();
    bool failed() const { return failed_; }
    const std::string& fail_reason() const { return fail_reason_; }
    /// Relational operations spent producing the most recent emission.
    unsigned long long last_delay_ops() const { return last_delay_ops_; }

private:
    struct Node {
        std::map<std::string, std::string> fixed;
        std::map<std::string, std::set<std::string>> excluded;
    };
    struct Entry {
        Weight weight;
        Assignment assignment;
        Node node;
    };

    SolveOutcome solve_node(const Node& node);
    void push_candidate(const Node& node);

    CspInstance base_inst_;
    ViewSet base_views_;
    ViewDatabase base_vdb_;
    StructuredValuation f_;
    VarSet o_;
    std::vector<std::string> o_order_;
    std::map<std::string, std::vector<Tok>> domains_;
    size_t remaining_;
    std::vector<Entry> queue_;
    bool failed_ = false;
    bool primed_ = false;
    std::string fail_reason_;
    unsigned long long last_delay_ops_ = 0;
};

/// Convenience wrapper collecting the whole stream.
std::vector<TopKStream::Item> top_k(const CspInstance& inst, const StructuredValuation& f,
                                    const ViewSet& v, const ViewDatabase& vdb, const VarSet& o,
                                    size_t k, bool* failed = nullptr);

/// Subexpression F_p of the valuation rooted at a parse-tree vertex.
StructuredValuation subvaluation(const StructuredValuation& f, const OutputAwareParseTree& t,
                                 int vertex);

// Evaluate-step building blocks, exposed for the unit tests.

/// Group rows by the first base_arity columns; max of xr (+) xt over the two
/// trailing weight columns. Missing groups are simply absent.
std::map<std::vector<Tok>, Weight> marginalize_pair(const Relation& rel, size_t base_arity,
                                                    OperatorKind op);
/// Keep, within each group of rows agreeing outside weight_var, only the rows
/// with the maximum weight_var value.
Relation marginalize_keep_max(const Relation& rel, const std::string& weight_var);

/// Views augmented with variable X (relation x active domain of X); views
/// already containing X are kept as they are.
std::pair<ViewSet, ViewDatabase> augment_views_with_variable(const ViewSet& v,
                                                             const ViewDatabase& vdb,
                                                             const std::string& x);

} // namespace treeproj
