// model.cpp - relational algebra and hypergraph machinery
#include "treeproj/model.hpp"

#include "treeproj/errors.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace treeproj {

namespace {

unsigned long long g_relop_count = 0;

struct RowHash {
    size_t operator()(const std::vector<Tok>& row) const {
        size_t h = 0x9e3779b97f4a7c15ULL;
        for (Tok t : row)
            h = h * 1099511628211ULL ^ static_cast<size_t>(static_cast<uint32_t>(t));
        return h;
    }
};

std::vector<int> columns_of(const Relation& r, const std::vector<std::string>& vars) {
    std::vector<int> idx;
    idx.reserve(vars.size());
    for (const auto& v : vars)
        idx.push_back(r.col(v));
    return idx;
}

std::vector<Tok> pick(const std::vector<Tok>& row, const std::vector<int>& idx) {
    std::vector<Tok> out;
    out.reserve(idx.size());
    for (int i : idx)
        out.push_back(row[static_cast<size_t>(i)]);
    return out;
}

} // namespace

unsigned long long relational_op_count() { return g_relop_count; }

bool tok_less(Tok a, Tok b) {
    if (a == b)
        return false;
    return tok_str(a) < tok_str(b);
}

bool row_less_by_token(const std::vector<Tok>& a, const std::vector<Tok>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), tok_less);
}

Assignment Assignment::restrict_to(const VarSet& w) const {
    Assignment out;
    for (const auto& [var, val] : bindings)
        if (w.count(var))
            out.bindings.emplace(var, val);
    return out;
}

Relation Relation::empty(std::vector<std::string> scope) {
    Relation r;
    r.scope = std::move(scope);
    return r;
}

Relation Relation::unit() {
    Relation r;
    r.rows.push_back({});
    return r;
}

bool Relation::has_var(const std::string& v) const {
    return std::find(scope.begin(), scope.end(), v) != scope.end();
}

int Relation::col(const std::string& v) const {
    auto it = std::find(scope.begin(), scope.end(), v);
    return it == scope.end() ? -1 : static_cast<int>(it - scope.begin());
}

void Relation::add_row(const std::vector<std::string>& values) {
    assert(values.size() == scope.size());
    std::vector<Tok> row;
    row.reserve(values.size());
    for (const auto& v : values)
        row.push_back(tok(v));
    rows.push_back(std::move(row));
}

void Relation::add_row_toks(std::vector<Tok> values) {
    assert(values.size() == scope.size());
    rows.push_back(std::move(values));
}

void Relation::normalize() {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

bool Relation::contains(const std::vector<Tok>& row) const {
    return std::binary_search(rows.begin(), rows.end(), row);
}

Assignment Relation::row_assignment(size_t i) const {
    Assignment a;
    for (size_t c = 0; c < scope.size(); ++c)
        a.bindings.emplace(scope[c], tok_str(rows[i][c]));
    return a;
}

std::vector<std::string> Relation::row_strings(size_t i) const {
    std::vector<std::string> out;
    out.reserve(scope.size());
    for (Tok t : rows[i])
        out.push_back(tok_str(t));
    return out;
}

bool Relation::operator==(const Relation& other) const {
    return scope == other.scope && rows == other.rows;
}

Relation join(const Relation& r1, const Relation& r2) {
    ++g_relop_count;
    std::vector<std::string> shared;
    std::vector<std::string> r2_only;
    for (const auto& v : r2.scope) {
        if (r1.has_var(v))
            shared.push_back(v);
        else
            r2_only.push_back(v);
    }
    Relation out;
    out.scope = r1.scope;
    out.scope.insert(out.scope.end(), r2_only.begin(), r2_only.end());

    auto key1 = columns_of(r1, shared);
    auto key2 = columns_of(r2, shared);
    auto extra2 = columns_of(r2, r2_only);

    std::unordered_map<std::vector<Tok>, std::vector<size_t>, RowHash> index;
    for (size_t i = 0; i < r2.rows.size(); ++i)
        index[pick(r2.rows[i], key2)].push_back(i);

    for (const auto& row1 : r1.rows) {
        auto it = index.find(pick(row1, key1));
        if (it == index.end())
            continue;
        for (size_t j : it->second) {
            std::vector<Tok> row = row1;
            for (int c : extra2)
                row.push_back(r2.rows[j][static_cast<size_t>(c)]);
            out.rows.push_back(std::move(row));
        }
    }
    out.normalize();
    return out;
}

Relation project(const Relation& r, const VarSet& w) {
    ++g_relop_count;
    std::vector<std::string> kept(w.begin(), w.end());
    Relation out;
    out.scope = kept;
    auto idx = columns_of(r, kept);
    for (int c : idx)
        if (c < 0)
            throw Error("project: variable not in scope");
    for (const auto& row : r.rows)
        out.rows.push_back(pick(row, idx));
    out.normalize();
    return out;
}

Relation semijoin(const Relation& r1, const Relation& r2) {
    ++g_relop_count;
    std::vector<std::string> shared;
    for (const auto& v : r1.scope)
        if (r2.has_var(v))
            shared.push_back(v);

    auto key1 = columns_of(r1, shared);
    auto key2 = columns_of(r2, shared);

    std::unordered_set<std::vector<Tok>, RowHash> keys;
    for (const auto& row2 : r2.rows)
        keys.insert(pick(row2, key2));

    Relation out;
    out.scope = r1.scope;
    for (const auto& row : r1.rows)
        if (keys.count(pick(row, key1)))
            out.rows.push_back(row);
    // rows stay sorted when r1 was normalized; normalize anyway for safety
    out.normalize();
    return out;
}

Relation cross_with_column(const Relation& r, const std::string& var, const std::vector<Tok>& values) {
    ++g_relop_count;
    Relation out;
    out.scope = r.scope;
    out.scope.push_back(var);
    for (const auto& row : r.rows) {
        for (Tok v : values) {
            std::vector<Tok> nr = row;
            nr.push_back(v);
            out.rows.push_back(std::move(nr));
        }
    }
    out.normalize();
    return out;
}

Relation select_eq(const Relation& r, const std::string& var, Tok t) {
    int c = r.col(var);
    if (c < 0)
        throw Error("select_eq: variable not in scope");
    Relation out;
    out.scope = r.scope;
    for (const auto& row : r.rows)
        if (row[static_cast<size_t>(c)] == t)
            out.rows.push_back(row);
    return out;
}

std::vector<Tok> column_values(const Relation& r, const std::string& var) {
    int c = r.col(var);
    if (c < 0)
        throw Error("column_values: variable not in scope");
    std::vector<Tok> out;
    for (const auto& row : r.rows)
        out.push_back(row[static_cast<size_t>(c)]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

VarSet CspInstance::variables() const {
    VarSet vars;
    for (const auto& a : formula)
        vars.insert(a.scope.begin(), a.scope.end());
    return vars;
}

bool CspInstance::satisfies(const Assignment& theta) const {
    for (const auto& a : formula) {
        std::vector<Tok> row;
        row.reserve(a.scope.size());
        for (const auto& v : a.scope) {
            if (!theta.binds(v))
                return false;
            row.push_back(tok(theta.at(v)));
        }
        if (!rel(a).contains(row))
            return false;
    }
    return true;
}

std::vector<std::vector<int>> JoinTree::adjacency() const {
    std::vector<std::vector<int>> adj(labels.size());
    for (auto [a, b] : edges) {
        adj[static_cast<size_t>(a)].push_back(b);
        adj[static_cast<size_t>(b)].push_back(a);
    }
    return adj;
}

bool JoinTree::is_tree() const {
    if (labels.empty())
        return false;
    if (edges.size() != labels.size() - 1)
        return false;
    auto adj = adjacency();
    std::vector<char> seen(labels.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    size_t visited = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[static_cast<size_t>(v)]) {
            if (!seen[static_cast<size_t>(u)]) {
                seen[static_cast<size_t>(u)] = 1;
                ++visited;
                stack.push_back(u);
            }
        }
    }
    return visited == labels.size();
}

JoinTree JoinTree::contract_edge(int keep, int drop) const {
    JoinTree out;
    std::vector<int> remap(labels.size());
    int next = 0;
    for (int v = 0; v < static_cast<int>(labels.size()); ++v) {
        if (v == drop) {
            remap[static_cast<size_t>(v)] = -1;
            continue;
        }
        remap[static_cast<size_t>(v)] = next++;
        out.labels.push_back(labels[static_cast<size_t>(v)]);
    }
    remap[static_cast<size_t>(drop)] = remap[static_cast<size_t>(keep)];
    for (auto [a, b] : edges) {
        int na = remap[static_cast<size_t>(a)];
        int nb = remap[static_cast<size_t>(b)];
        if (na != nb)
            out.edges.emplace_back(na, nb);
    }
    if (root)
        out.root = remap[static_cast<size_t>(*root)];
    return out;
}

Hypergraph hypergraph_of(const std::vector<Atom>& formula) {
    Hypergraph h;
    for (const auto& a : formula) {
        VarSet e(a.scope.begin(), a.scope.end());
        h.nodes.insert(e.begin(), e.end());
        h.edges.insert(std::move(e));
    }
    return h;
}

std::optional<JoinTree> is_acyclic(const Hypergraph& h) {
    std::vector<VarSet> edges(h.edges.begin(), h.edges.end()); // canonical order
    size_t n = edges.size();
    if (n == 0)
        return std::nullopt;

    std::vector<char> removed(n, 0);
    std::vector<int> parent(n, -1);
    size_t alive = n;

    while (alive > 1) {
        bool progressed = false;
        for (size_t e = 0; e < n && !progressed; ++e) {
            if (removed[e])
                continue;
            // nodes of e occurring in some other live edge
            VarSet shared;
            for (const auto& x : edges[e]) {
                for (size_t o = 0; o < n; ++o) {
                    if (o == e || removed[o])
                        continue;
                    if (edges[o].count(x)) {
                        shared.insert(x);
                        break;
                    }
                }
            }
            for (size_t w = 0; w < n; ++w) {
                if (w == e || removed[w])
                    continue;
                if (std::includes(edges[w].begin(), edges[w].end(), shared.begin(), shared.end())) {
                    removed[e] = 1;
                    parent[e] = static_cast<int>(w);
                    --alive;
                    progressed = true;
                    break;
                }
            }
        }
        if (!progressed)
            return std::nullopt;
    }

    JoinTree jt;
    jt.labels = edges;
    for (size_t e = 0; e < n; ++e)
        if (parent[e] >= 0)
            jt.edges.emplace_back(static_cast<int>(e), parent[e]);
    for (size_t e = 0; e < n; ++e)
        if (!removed[e])
            jt.root = static_cast<int>(e);
    return jt;
}

bool check_join_tree(const JoinTree& jt, const Hypergraph& h) {
    if (!jt.is_tree())
        return false;
    // every label is a hyperedge, and every hyperedge is some label
    for (const auto& lab : jt.labels)
        if (!h.edges.count(lab))
            return false;
    for (const auto& e : h.edges) {
        bool found = false;
        for (const auto& lab : jt.labels)
            if (lab == e) {
                found = true;
                break;
            }
        if (!found)
            return false;
    }
    // connectedness: the occurrence set of each node induces a subtree
    auto adj = jt.adjacency();
    for (const auto& x : h.nodes) {
        std::vector<int> occ;
        for (int v = 0; v < static_cast<int>(jt.size()); ++v)
            if (jt.labels[static_cast<size_t>(v)].count(x))
                occ.push_back(v);
        if (occ.empty())
            continue;
        std::vector<char> seen(jt.size(), 0);
        std::vector<int> stack{occ[0]};
        seen[static_cast<size_t>(occ[0])] = 1;
        size_t reached = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u : adj[static_cast<size_t>(v)]) {
                if (!seen[static_cast<size_t>(u)] && jt.labels[static_cast<size_t>(u)].count(x)) {
                    seen[static_cast<size_t>(u)] = 1;
                    ++reached;
                    stack.push_back(u);
                }
            }
        }
        if (reached != occ.size())
            return false;
    }
    return true;
}

bool covers(const Hypergraph& h1, const Hypergraph& h2) {
    for (const auto& e1 : h1.edges) {
        bool ok = false;
        for (const auto& e2 : h2.edges) {
            if (std::includes(e2.begin(), e2.end(), e1.begin(), e1.end())) {
                ok = true;
                break;
            }
        }
        if (!ok)
            return false;
    }
    return true;
}

bool is_tree_projection(const Hypergraph& ha, const Hypergraph& h1, const Hypergraph& h2) {
    return is_acyclic(ha).has_value() && covers(h1, ha) && covers(ha, h2);
}

const std::vector<Tok>* lex_least_row(const Relation& r, const std::vector<size_t>& among) {
    const std::vector<Tok>* best = nullptr;
    for (size_t i : among) {
        const auto& row = r.rows[i];
        if (!best || row_less_by_token(row, *best))
            best = &row;
    }
    return best;
}

} // namespace treeproj
