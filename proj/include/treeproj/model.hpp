// model.hpp - relational and hypergraph core: CSP instances, assignments,
// relations, relational algebra, hypergraphs, join trees, tree projections
#pragma once

#include "treeproj/interner.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace treeproj {

using VarSet = std::set<std::string>;

/// Partial assignment: finite map variable -> value token.
struct Assignment {
    std::map<std::string, std::string> bindings;

    bool binds(const std::string& var) const { return bindings.count(var) != 0; }
    const std::string& at(const std::string& var) const { return bindings.at(var); }

    /// theta[W]: restriction to the variables in w.
    Assignment restrict_to(const VarSet& w) const;

    bool operator==(const Assignment&) const = default;
    auto operator<=>(const Assignment&) const = default;
};

/// Relation over an ordered scope of distinct variables. Rows are a set
/// (duplicate-free) kept in a canonical in-process order.
struct Relation {
    std::vector<std::string> scope;
    std::vector<std::vector<Tok>> rows;

    static Relation empty(std::vector<std::string> scope);
    /// Nullary relation with a single empty row (the neutral join element).
    static Relation unit();

    size_t arity() const { return scope.size(); }
    size_t size() const { return rows.size(); }
    bool has_var(const std::string& v) const;
    int col(const std::string& v) const; // -1 if absent

    void add_row(const std::vector<std::string>& values);
    void add_row_toks(std::vector<Tok> values);
    /// Sort rows canonically and drop duplicates.
    void normalize();

    bool contains(const std::vector<Tok>& row) const;
    Assignment row_assignment(size_t i) const;
    std::vector<std::string> row_strings(size_t i) const;

    bool operator==(const Relation& other) const;
};

/// Natural join.
Relation join(const Relation& r1, const Relation& r2);
/// Duplicate-eliminating projection onto w (order: canonical sort of w).
Relation project(const Relation& r, const VarSet& w);
/// r1 filtered to rows that agree with some r2 row on the shared variables.
Relation semijoin(const Relation& r1, const Relation& r2);
/// Cartesian product with a unary column (used to relax/augment views).
Relation cross_with_column(const Relation& r, const std::string& var, const std::vector<Tok>& values);
/// Rows of r whose column var has value t.
Relation select_eq(const Relation& r, const std::string& var, Tok t);
/// Distinct values of one column.
std::vector<Tok> column_values(const Relation& r, const std::string& var);

struct Atom {
    std::string symbol;
    std::vector<std::string> scope; // pairwise distinct variables
};

struct CspInstance {
    std::vector<Atom> formula;
    std::map<std::string, Relation> database; // keyed by relation symbol

    const Relation& rel(const Atom& a) const { return database.at(a.symbol); }
    VarSet variables() const;
    /// true iff theta (total over the atom scopes it touches) satisfies every atom.
    bool satisfies(const Assignment& theta) const;
};

struct Hypergraph {
    VarSet nodes;
    std::set<VarSet> edges;
};

/// Labeled tree (V,E,chi); vertices indexed 0..n-1.
struct JoinTree {
    std::vector<VarSet> labels;
    std::vector<std::pair<int, int>> edges;
    std::optional<int> root;

    size_t size() const { return labels.size(); }
    std::vector<std::vector<int>> adjacency() const;
    bool is_tree() const;
    /// Contract edge {keep, drop}; valid when labels[drop] is a subset of labels[keep].
    JoinTree contract_edge(int keep, int drop) const;
};

Hypergraph hypergraph_of(const std::vector<Atom>& formula);

/// GYO-style ear removal with smallest-name tie-breaking; returns a witness
/// join tree (one vertex per distinct hyperedge) or nullopt when cyclic.
std::optional<JoinTree> is_acyclic(const Hypergraph& h);

/// Covering Condition + Connectedness Condition + tree shape.
bool check_join_tree(const JoinTree& jt, const Hypergraph& h);

/// Every hyperedge of h1 is contained in some hyperedge of h2.
bool covers(const Hypergraph& h1, const Hypergraph& h2);

/// ha acyclic, h1 <= ha <= h2.
bool is_tree_projection(const Hypergraph& ha, const Hypergraph& h1, const Hypergraph& h2);

/// Monotone counter of basic relational operations (join/project/semijoin/
/// product); backs the polynomial-delay instrumentation.
unsigned long long relational_op_count();

// Row/token ordering helpers. Token order compares the interned strings.
bool tok_less(Tok a, Tok b);
bool row_less_by_token(const std::vector<Tok>& a, const std::vector<Tok>& b);
/// Lexicographically least row under token order (canonical tie-break).
const std::vector<Tok>* lex_least_row(const Relation& r, const std::vector<size_t>& among);

} // namespace treeproj
