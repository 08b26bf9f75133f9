// valuation.hpp - weight functions, (structured) valuation functions, parse
// trees, embeddings into join trees, and the svf machinery
#pragma once

#include "treeproj/model.hpp"
#include "treeproj/weight.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace treeproj {

struct WeightFunction {
    enum class Body { Table, Identity, Constant };

    std::string name;
    VarSet vars;
    Body body = Body::Constant;
    bool negated = false; // the min-sum shim flips weights on their way in
    std::string identity_var;                          // Body::Identity
    Weight constant;                                   // Body::Constant
    std::map<std::vector<std::string>, Weight> table;  // keyed by values in sorted-var order

    static WeightFunction identity(std::string var);
    static WeightFunction constant_fn(std::string name, Weight w);
    static WeightFunction table_fn(std::string name, VarSet vars,
                                   std::map<std::vector<std::string>, Weight> entries);

    Weight eval(const Assignment& theta) const;
};

/// Binary expression tree; leaves are weight functions, internal vertices
/// carry an operator. Mixed operators are allowed.
struct StructuredValuation {
    struct Node {
        bool leaf = true;
        int func = -1;          // leaves
        OperatorKind op{};      // internal
        int left = -1, right = -1;
    };

    std::vector<WeightFunction> functions;
    std::vector<Node> nodes;
    int root = -1;

    static StructuredValuation single(WeightFunction f);

    size_t leaf_count() const;
    VarSet variables() const;
    Weight evaluate(const Assignment& theta) const;
    std::string to_string() const;
    /// Shape-independent canonical form (children sorted); used for dedup checks.
    std::string canonical_form() const;
};

struct FlatValuation {
    OperatorKind op = OperatorKind::Sum;
    std::vector<WeightFunction> functions; // m >= 1

    VarSet variables() const;
    Weight evaluate(const Assignment& theta) const;
    /// Left-deep parenthesization (f1 op f2) op f3 ...
    StructuredValuation to_structured() const;
};

/// Output-aware parse tree tree(F,O): the parse tree of F plus a fresh root
/// labeled by the output variables O (the root has exactly one child).
struct OutputAwareParseTree {
    enum class Kind { Leaf, Internal, Root };
    struct Vertex {
        Kind kind;
        VarSet vars;       // leaf: vars(f); root: O
        OperatorKind op{}; // internal
        int func = -1;     // leaf: index into the valuation's functions
        int parent = -1;
        std::vector<int> children;
    };

    std::vector<Vertex> vertices;
    int root = -1;

    size_t size() const { return vertices.size(); }
    /// Deterministic topological order: post-order, left child first, root last.
    std::vector<int> postorder() const;
};

OutputAwareParseTree build_output_aware_tree(const StructuredValuation& f, const VarSet& o);

/// Injective map parse-tree vertex -> join-tree vertex with its witness tree.
struct Embedding {
    std::vector<int> xi; // indexed by parse-tree vertex
    JoinTree witness;
};

/// Def. 4: injectivity, variable covering (1), and separation of adjacent
/// vertices' images (2), the latter via connected components of witness - xi(p).
bool check_embedding(const Embedding& e, const OutputAwareParseTree& t, const Hypergraph& ha);

/// Both directions of the descendant relationship, witness rooted at xi(root).
bool descendant_preserved(const Embedding& e, const OutputAwareParseTree& t);

/// Builds a valid embedding from an injective map satisfying covering and
/// descendant preservation: internal vertices are remapped to the branching
/// vertex of their children's images.
Embedding complete_embedding(const Embedding& xi, const OutputAwareParseTree& t, const JoinTree& jt);

/// Restartable, deterministic stream over svf(F): every binary tree over the
/// leaf multiset (all orderings and parenthesizations, one representative per
/// commutative-equivalence class). Yields (2m-3)!! trees for m leaves.
class SvfEnumerator {
public:
    explicit SvfEnumerator(FlatValuation flat);

    std::optional<StructuredValuation> next();
    void reset();
    /// Number of trees the stream yields in total.
    static unsigned long long count_for(size_t m);

private:
    StructuredValuation tree_at(const std::vector<size_t>& digits) const;

    FlatValuation flat_;
    std::vector<size_t> digits_;
    bool exhausted_ = false;
    bool started_ = false;
};

/// Theorem-6 construction: from a flat valuation, output variables and an
/// acyclic hypergraph covering them, build an equivalent structured valuation
/// together with an embedding into ha.
std::pair<StructuredValuation, Embedding>
svf_from_tree_projection(const FlatValuation& f, const VarSet& o, const Hypergraph& ha);

} // namespace treeproj
