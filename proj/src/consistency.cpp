// consistency.cpp
#include "treeproj/consistency.hpp"

#include "treeproj/errors.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <random>
#include <set>

namespace treeproj {

VarSet EJoinTree::Vertex::sch() const {
    VarSet s = ret;
    s.insert(iet.begin(), iet.end());
    s.insert(oet.begin(), oet.end());
    return s;
}

int EJoinTree::unmarked_depth() const {
    std::function<int(int)> depth = [&](int v) -> int {
        int d = 0;
        for (int c : verts[static_cast<size_t>(v)].children)
            if (unmarked(c))
                d = std::max(d, 1 + depth(c));
        return d;
    };
    return depth(root);
}

std::vector<int> EJoinTree::unmarked_leaves() const {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(verts.size()); ++v) {
        if (!unmarked(v))
            continue;
        bool has_unmarked_child = false;
        for (int c : verts[static_cast<size_t>(v)].children)
            if (unmarked(c)) {
                has_unmarked_child = true;
                break;
            }
        if (!has_unmarked_child)
            out.push_back(v);
    }
    return out;
}

int EJoinTree::unmarked_parent(int v) const {
    int p = verts[static_cast<size_t>(v)].parent;
    while (p >= 0 && !unmarked(p))
        p = verts[static_cast<size_t>(p)].parent;
    return p;
}

bool pairwise_fixpoint(std::map<std::string, Relation>& rels,
                       const std::vector<std::string>& participants,
                       const std::vector<std::string>& sources,
                       std::optional<std::uint64_t> order_seed) {
    // ordered pair (a, b): semijoin reduces a against b
    auto shares_var = [&](const std::string& a, const std::string& b) {
        const Relation& ra = rels.at(a);
        const Relation& rb = rels.at(b);
        for (const auto& v : ra.scope)
            if (rb.has_var(v))
                return true;
        return false;
    };

    std::deque<std::pair<std::string, std::string>> work;
    std::set<std::pair<std::string, std::string>> queued;
    auto push = [&](const std::string& a, const std::string& b) {
        if (a == b || !shares_var(a, b))
            return;
        if (queued.emplace(a, b).second)
            work.emplace_back(a, b);
    };

    if (sources.empty()) {
        for (const auto& a : participants)
            for (const auto& b : participants)
                push(a, b);
    } else {
        for (const auto& b : sources)
            for (const auto& a : participants)
                push(a, b);
    }
    if (order_seed) {
        std::vector<std::pair<std::string, std::string>> shuffled(work.begin(), work.end());
        std::mt19937_64 rng(*order_seed);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        work.assign(shuffled.begin(), shuffled.end());
    }

    while (!work.empty()) {
        auto [a, b] = work.front();
        work.pop_front();
        queued.erase({a, b});
        Relation reduced = semijoin(rels.at(a), rels.at(b));
        if (reduced.size() != rels.at(a).size()) {
            rels.at(a) = std::move(reduced);
            for (const auto& c : participants)
                push(c, a);
        }
    }

    for (const auto& p : participants)
        if (rels.at(p).rows.empty())
            return true;
    return false;
}

std::pair<ViewDatabase, bool> enforce_pairwise(const ViewSet& v, const ViewDatabase& vdb,
                                               std::optional<std::uint64_t> order_seed) {
    ViewDatabase out = vdb;
    std::vector<std::string> participants;
    for (const auto& w : v.views)
        participants.push_back(w.symbol);
    bool empty = pairwise_fixpoint(out.relations, participants, {}, order_seed);
    return {std::move(out), empty};
}

namespace {

struct RootedJt {
    std::vector<int> parent;
    std::vector<std::vector<int>> children;
    std::vector<int> preorder; // root first
};

RootedJt orient(const JoinTree& jt, int root) {
    RootedJt out;
    out.parent.assign(jt.size(), -2);
    out.children.assign(jt.size(), {});
    auto adj = jt.adjacency();
    out.parent[static_cast<size_t>(root)] = -1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        out.preorder.push_back(v);
        // deterministic child order: ascending vertex index
        std::vector<int> nbrs = adj[static_cast<size_t>(v)];
        std::sort(nbrs.begin(), nbrs.end());
        for (int u : nbrs) {
            if (out.parent[static_cast<size_t>(u)] == -2) {
                out.parent[static_cast<size_t>(u)] = v;
                out.children[static_cast<size_t>(v)].push_back(u);
                stack.push_back(u);
            }
        }
    }
    return out;
}

} // namespace

CspInstance full_reduce_acyclic(const CspInstance& inst, const JoinTree& jt) {
    Hypergraph h = hypergraph_of(inst.formula);
    if (!check_join_tree(jt, h))
        throw NotAcyclic("full_reduce_acyclic: join tree does not witness the instance");

    // merge same-scope atoms (join over identical scope = set intersection)
    std::map<VarSet, Relation> merged;
    std::map<VarSet, std::vector<size_t>> scope_atoms;
    for (size_t ai = 0; ai < inst.formula.size(); ++ai) {
        const Atom& a = inst.formula[ai];
        VarSet key(a.scope.begin(), a.scope.end());
        Relation proj = project(inst.rel(a), key);
        auto [it, fresh] = merged.emplace(key, proj);
        if (!fresh) {
            std::vector<std::vector<Tok>> inter;
            std::set_intersection(it->second.rows.begin(), it->second.rows.end(),
                                  proj.rows.begin(), proj.rows.end(), std::back_inserter(inter));
            it->second.rows = std::move(inter);
        }
        scope_atoms[key].push_back(ai);
    }

    int root = jt.root.value_or(0);
    RootedJt rt = orient(jt, root);
    std::vector<Relation> rel(jt.size());
    for (size_t v = 0; v < jt.size(); ++v)
        rel[v] = merged.at(jt.labels[v]);

    // upward sweep: parent reduced against each child, leaves first
    for (auto it = rt.preorder.rbegin(); it != rt.preorder.rend(); ++it) {
        int v = *it;
        for (int c : rt.children[static_cast<size_t>(v)])
            rel[static_cast<size_t>(v)] = semijoin(rel[static_cast<size_t>(v)], rel[static_cast<size_t>(c)]);
    }
    // downward sweep
    for (int v : rt.preorder)
        for (int c : rt.children[static_cast<size_t>(v)])
            rel[static_cast<size_t>(c)] = semijoin(rel[static_cast<size_t>(c)], rel[static_cast<size_t>(v)]);

    // one reduced relation per scope; all same-scope atoms receive it
    std::map<VarSet, const Relation*> reduced;
    for (size_t v = 0; v < jt.size(); ++v)
        reduced.emplace(jt.labels[v], &rel[v]);

    CspInstance out;
    out.formula = inst.formula;
    for (const auto& [key, atoms] : scope_atoms) {
        const Relation& r = *reduced.at(key);
        for (size_t ai : atoms) {
            const Atom& a = inst.formula[ai];
            Relation final_rel = Relation::empty(a.scope);
            std::vector<int> idx;
            for (const auto& var : a.scope)
                idx.push_back(r.col(var));
            for (const auto& row : r.rows) {
                std::vector<Tok> nr;
                nr.reserve(idx.size());
                for (int c : idx)
                    nr.push_back(row[static_cast<size_t>(c)]);
                final_rel.rows.push_back(std::move(nr));
            }
            final_rel.normalize();
            out.database.emplace(a.symbol, std::move(final_rel));
        }
    }
    return out;
}

bool is_globally_consistent(const CspInstance& inst, const OracleBudget& budget) {
    for (const auto& a : inst.formula) {
        const Relation& r = inst.rel(a);
        for (size_t i = 0; i < r.rows.size(); ++i) {
            if (!oracle_extend(inst, r.row_assignment(i), budget))
                return false;
        }
    }
    return true;
}

EJoinTree build_ejointree(const CspInstance& inst, const JoinTree& jt) {
    Hypergraph h = hypergraph_of(inst.formula);
    if (!check_join_tree(jt, h))
        throw NotAcyclic("build_ejointree: join tree does not witness the instance");

    // root at the vertex carrying the first atom's scope
    VarSet first_scope(inst.formula.front().scope.begin(), inst.formula.front().scope.end());
    int root = -1;
    for (size_t v = 0; v < jt.size(); ++v)
        if (jt.labels[v] == first_scope) {
            root = static_cast<int>(v);
            break;
        }
    RootedJt rt = orient(jt, root);

    EJoinTree t;
    t.verts.resize(jt.size());
    for (size_t v = 0; v < jt.size(); ++v) {
        t.verts[v].parent = rt.parent[v];
        t.verts[v].children = rt.children[v];
    }
    t.root = root;

    // one vertex per constraint: assign atoms to label-matching vertices,
    // overflow atoms become fresh children of the first host
    std::map<VarSet, std::vector<int>> verts_by_label;
    for (size_t v = 0; v < jt.size(); ++v)
        verts_by_label[jt.labels[v]].push_back(static_cast<int>(v));
    std::map<VarSet, std::vector<size_t>> atoms_by_scope;
    for (size_t ai = 0; ai < inst.formula.size(); ++ai) {
        const Atom& a = inst.formula[ai];
        atoms_by_scope[VarSet(a.scope.begin(), a.scope.end())].push_back(ai);
    }
    auto setup_vertex = [&](EJoinTree::Vertex& vert, const Atom& atom) {
        vert.ret = VarSet(atom.scope.begin(), atom.scope.end());
        vert.rel = inst.rel(atom);
        vert.atom = atom.symbol;
    };
    for (auto& [label, hosts] : verts_by_label) {
        const auto& atoms = atoms_by_scope.at(label);
        for (size_t i = 0; i < hosts.size(); ++i) {
            size_t ai = atoms[std::min(i, atoms.size() - 1)];
            setup_vertex(t.verts[static_cast<size_t>(hosts[i])], inst.formula[ai]);
        }
        for (size_t i = hosts.size(); i < atoms.size(); ++i) {
            EJoinTree::Vertex extra;
            extra.parent = hosts[0];
            setup_vertex(extra, inst.formula[atoms[i]]);
            t.verts.push_back(std::move(extra));
            t.verts[static_cast<size_t>(hosts[0])].children.push_back(
                static_cast<int>(t.verts.size()) - 1);
        }
    }

    // binarize: lone children get a sibling copy of the parent; wide vertices
    // hand surplus children to a chain of parent copies; a leaf root gets two
    // copy children so the tree always has depth >= 1
    for (size_t v = 0; v < t.verts.size(); ++v) {
        auto copy_of = [&](size_t src) {
            EJoinTree::Vertex c;
            c.ret = t.verts[src].ret;
            c.rel = t.verts[src].rel;
            c.atom = t.verts[src].atom;
            c.parent = static_cast<int>(src);
            return c;
        };
        if (t.verts[v].children.size() == 1 ||
            (static_cast<int>(v) == t.root && t.verts[v].children.empty())) {
            size_t extra = static_cast<int>(v) == t.root && t.verts[v].children.empty() ? 2 : 1;
            for (size_t i = 0; i < extra; ++i) {
                t.verts.push_back(copy_of(v));
                t.verts[v].children.push_back(static_cast<int>(t.verts.size()) - 1);
            }
        }
        while (t.verts[v].children.size() > 2) {
            EJoinTree::Vertex chain = copy_of(v);
            chain.children.assign(t.verts[v].children.begin() + 1, t.verts[v].children.end());
            t.verts.push_back(std::move(chain));
            int chain_idx = static_cast<int>(t.verts.size()) - 1;
            for (int c : t.verts[static_cast<size_t>(chain_idx)].children)
                t.verts[static_cast<size_t>(c)].parent = chain_idx;
            t.verts[v].children.resize(1);
            t.verts[v].children.push_back(chain_idx);
        }
    }

    // number leaves left to right
    int label = 1;
    std::function<void(int)> number = [&](int v) {
        auto& vert = t.verts[static_cast<size_t>(v)];
        if (vert.children.empty()) {
            vert.leaf_label = label++;
            return;
        }
        for (int c : vert.children)
            number(c);
    };
    number(t.root);
    return t;
}

} // namespace treeproj
