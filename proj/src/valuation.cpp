// valuation.cpp
#include "treeproj/valuation.hpp"

#include "treeproj/errors.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace treeproj {

WeightFunction WeightFunction::identity(std::string var) {
    WeightFunction f;
    f.name = "f_" + var;
    f.vars = {var};
    f.body = Body::Identity;
    f.identity_var = std::move(var);
    return f;
}

WeightFunction WeightFunction::constant_fn(std::string name, Weight w) {
    WeightFunction f;
    f.name = std::move(name);
    f.body = Body::Constant;
    f.constant = std::move(w);
    return f;
}

WeightFunction WeightFunction::table_fn(std::string name, VarSet vars,
                                        std::map<std::vector<std::string>, Weight> entries) {
    WeightFunction f;
    f.name = std::move(name);
    f.vars = std::move(vars);
    f.body = Body::Table;
    f.table = std::move(entries);
    return f;
}

Weight WeightFunction::eval(const Assignment& theta) const {
    for (const auto& v : vars)
        if (!theta.binds(v))
            throw UnboundVariable("weight function " + name + ": unbound variable " + v);
    Weight out;
    switch (body) {
    case Body::Constant:
        out = constant;
        break;
    case Body::Identity: {
        const std::string& token = theta.at(identity_var);
        try {
            out = Weight::finite(parse_rational(token));
        } catch (const NonNumericToken&) {
            throw NonNumericToken("identity weight function " + name + ": non-numeric token '" +
                                  token + "'");
        }
        break;
    }
    case Body::Table: {
        std::vector<std::string> key;
        key.reserve(vars.size());
        for (const auto& v : vars)
            key.push_back(theta.at(v));
        auto it = table.find(key);
        if (it == table.end())
            throw Error("weight function " + name + ": no table entry for assignment");
        out = it->second;
        break;
    }
    }
    return negated ? out.negated() : out;
}

StructuredValuation StructuredValuation::single(WeightFunction f) {
    StructuredValuation sv;
    sv.functions.push_back(std::move(f));
    sv.nodes.push_back(Node{true, 0, OperatorKind::Sum, -1, -1});
    sv.root = 0;
    return sv;
}

size_t StructuredValuation::leaf_count() const { return functions.size(); }

VarSet StructuredValuation::variables() const {
    VarSet out;
    for (const auto& f : functions)
        out.insert(f.vars.begin(), f.vars.end());
    return out;
}

Weight StructuredValuation::evaluate(const Assignment& theta) const {
    std::function<Weight(int)> go = [&](int n) -> Weight {
        const Node& node = nodes[static_cast<size_t>(n)];
        if (node.leaf)
            return functions[static_cast<size_t>(node.func)].eval(theta);
        return apply(node.op, go(node.left), go(node.right));
    };
    return go(root);
}

std::string StructuredValuation::to_string() const {
    std::function<std::string(int)> go = [&](int n) -> std::string {
        const Node& node = nodes[static_cast<size_t>(n)];
        if (node.leaf)
            return functions[static_cast<size_t>(node.func)].name;
        std::string l = go(node.left), r = go(node.right);
        switch (node.op) {
        case OperatorKind::Sum:
            return "(" + l + "+" + r + ")";
        case OperatorKind::Product:
            return "(" + l + "*" + r + ")";
        case OperatorKind::Min:
            return "min(" + l + "," + r + ")";
        }
        return "?";
    };
    return go(root);
}

std::string StructuredValuation::canonical_form() const {
    std::function<std::string(int)> go = [&](int n) -> std::string {
        const Node& node = nodes[static_cast<size_t>(n)];
        if (node.leaf)
            return functions[static_cast<size_t>(node.func)].name;
        std::string l = go(node.left), r = go(node.right);
        if (r < l)
            std::swap(l, r);
        return std::string(operator_name(node.op)) + "(" + l + "," + r + ")";
    };
    return go(root);
}

VarSet FlatValuation::variables() const {
    VarSet out;
    for (const auto& f : functions)
        out.insert(f.vars.begin(), f.vars.end());
    return out;
}

Weight FlatValuation::evaluate(const Assignment& theta) const {
    Weight acc = functions.front().eval(theta);
    for (size_t i = 1; i < functions.size(); ++i)
        acc = apply(op, acc, functions[i].eval(theta));
    return acc;
}

StructuredValuation FlatValuation::to_structured() const {
    StructuredValuation sv;
    sv.functions = functions;
    int prev = -1;
    for (size_t i = 0; i < functions.size(); ++i) {
        sv.nodes.push_back(StructuredValuation::Node{true, static_cast<int>(i), op, -1, -1});
        int leaf = static_cast<int>(sv.nodes.size()) - 1;
        if (prev < 0) {
            prev = leaf;
        } else {
            sv.nodes.push_back(StructuredValuation::Node{false, -1, op, prev, leaf});
            prev = static_cast<int>(sv.nodes.size()) - 1;
        }
    }
    sv.root = prev;
    return sv;
}

OutputAwareParseTree build_output_aware_tree(const StructuredValuation& f, const VarSet& o) {
    OutputAwareParseTree t;
    std::function<int(int)> copy = [&](int n) -> int {
        const auto& node = f.nodes[static_cast<size_t>(n)];
        if (node.leaf) {
            OutputAwareParseTree::Vertex v;
            v.kind = OutputAwareParseTree::Kind::Leaf;
            v.func = node.func;
            v.vars = f.functions[static_cast<size_t>(node.func)].vars;
            t.vertices.push_back(std::move(v));
            return static_cast<int>(t.vertices.size()) - 1;
        }
        int l = copy(node.left);
        int r = copy(node.right);
        OutputAwareParseTree::Vertex v;
        v.kind = OutputAwareParseTree::Kind::Internal;
        v.op = node.op;
        v.children = {l, r};
        t.vertices.push_back(std::move(v));
        int self = static_cast<int>(t.vertices.size()) - 1;
        t.vertices[static_cast<size_t>(l)].parent = self;
        t.vertices[static_cast<size_t>(r)].parent = self;
        return self;
    };
    int expr_root = copy(f.root);
    OutputAwareParseTree::Vertex rootv;
    rootv.kind = OutputAwareParseTree::Kind::Root;
    rootv.vars = o;
    rootv.children = {expr_root};
    t.vertices.push_back(std::move(rootv));
    t.root = static_cast<int>(t.vertices.size()) - 1;
    t.vertices[static_cast<size_t>(expr_root)].parent = t.root;
    return t;
}

std::vector<int> OutputAwareParseTree::postorder() const {
    std::vector<int> order;
    std::function<void(int)> go = [&](int v) {
        for (int c : vertices[static_cast<size_t>(v)].children)
            go(c);
        order.push_back(v);
    };
    go(root);
    return order;
}

namespace {

// Rooted view of a join tree: parent array via BFS from root.
std::vector<int> root_tree(const JoinTree& jt, int root) {
    auto adj = jt.adjacency();
    std::vector<int> parent(jt.size(), -2);
    parent[static_cast<size_t>(root)] = -1;
    std::vector<int> queue{root};
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        int v = queue[qi];
        for (int u : adj[static_cast<size_t>(v)]) {
            if (parent[static_cast<size_t>(u)] == -2) {
                parent[static_cast<size_t>(u)] = v;
                queue.push_back(u);
            }
        }
    }
    return parent;
}

bool is_strict_descendant(const std::vector<int>& parent, int x, int y) {
    int v = parent[static_cast<size_t>(x)];
    while (v >= 0) {
        if (v == y)
            return true;
        v = parent[static_cast<size_t>(v)];
    }
    return false;
}

// Components of witness - {cut}; comp[cut] = -1.
std::vector<int> components_without(const JoinTree& jt, int cut) {
    auto adj = jt.adjacency();
    std::vector<int> comp(jt.size(), -1);
    int next = 0;
    for (int s = 0; s < static_cast<int>(jt.size()); ++s) {
        if (s == cut || comp[static_cast<size_t>(s)] >= 0)
            continue;
        comp[static_cast<size_t>(s)] = next;
        std::vector<int> stack{s};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u : adj[static_cast<size_t>(v)]) {
                if (u == cut || comp[static_cast<size_t>(u)] >= 0)
                    continue;
                comp[static_cast<size_t>(u)] = next;
                stack.push_back(u);
            }
        }
        ++next;
    }
    return comp;
}

bool covering_condition_holds(const Embedding& e, const OutputAwareParseTree& t, const VarSet& ha_nodes) {
    for (size_t p = 0; p < t.size(); ++p) {
        const auto& vert = t.vertices[p];
        if (vert.kind == OutputAwareParseTree::Kind::Internal)
            continue;
        const VarSet& label = e.witness.labels[static_cast<size_t>(e.xi[p])];
        for (const auto& x : vert.vars) {
            if (!ha_nodes.count(x))
                continue;
            if (!label.count(x))
                return false;
        }
    }
    return true;
}

} // namespace

bool check_embedding(const Embedding& e, const OutputAwareParseTree& t, const Hypergraph& ha) {
    if (e.xi.size() != t.size())
        return false;
    std::vector<char> used(e.witness.size(), 0);
    for (int v : e.xi) {
        if (v < 0 || v >= static_cast<int>(e.witness.size()))
            return false;
        if (used[static_cast<size_t>(v)])
            return false; // injectivity
        used[static_cast<size_t>(v)] = 1;
    }
    if (!covering_condition_holds(e, t, ha.nodes))
        return false;
    // condition (2): adjacent vertices' images separated by xi(p)
    for (size_t p = 0; p < t.size(); ++p) {
        const auto& vert = t.vertices[p];
        std::vector<int> adjacent = vert.children;
        if (vert.parent >= 0)
            adjacent.push_back(vert.parent);
        if (adjacent.size() < 2)
            continue;
        auto comp = components_without(e.witness, e.xi[p]);
        for (size_t a = 0; a < adjacent.size(); ++a) {
            for (size_t b = a + 1; b < adjacent.size(); ++b) {
                int ca = comp[static_cast<size_t>(e.xi[static_cast<size_t>(adjacent[a])])];
                int cb = comp[static_cast<size_t>(e.xi[static_cast<size_t>(adjacent[b])])];
                if (ca == cb)
                    return false;
            }
        }
    }
    return true;
}

bool descendant_preserved(const Embedding& e, const OutputAwareParseTree& t) {
    auto wparent = root_tree(e.witness, e.xi[static_cast<size_t>(t.root)]);
    std::vector<int> tparent(t.size());
    for (size_t p = 0; p < t.size(); ++p)
        tparent[p] = t.vertices[p].parent;
    for (size_t u = 0; u < t.size(); ++u) {
        for (size_t v = 0; v < t.size(); ++v) {
            if (u == v)
                continue;
            bool dw = is_strict_descendant(wparent, e.xi[u], e.xi[v]);
            bool dt = is_strict_descendant(tparent, static_cast<int>(u), static_cast<int>(v));
            if (dw != dt)
                return false;
        }
    }
    return true;
}

Embedding complete_embedding(const Embedding& xi, const OutputAwareParseTree& t, const JoinTree& jt) {
    VarSet all_nodes;
    for (const auto& lab : jt.labels)
        all_nodes.insert(lab.begin(), lab.end());
    Embedding in{xi.xi, jt};
    if (!covering_condition_holds(in, t, all_nodes))
        throw PreconditionViolated("complete_embedding: covering condition violated");
    if (!descendant_preserved(in, t))
        throw PreconditionViolated("complete_embedding: descendant preservation violated");

    auto wparent = root_tree(jt, xi.xi[static_cast<size_t>(t.root)]);
    std::vector<int> depth(jt.size(), 0);
    for (size_t v = 0; v < jt.size(); ++v) {
        int d = 0;
        for (int x = static_cast<int>(v); wparent[static_cast<size_t>(x)] >= 0;
             x = wparent[static_cast<size_t>(x)])
            ++d;
        depth[v] = d;
    }
    auto lca = [&](int a, int b) {
        while (depth[static_cast<size_t>(a)] > depth[static_cast<size_t>(b)])
            a = wparent[static_cast<size_t>(a)];
        while (depth[static_cast<size_t>(b)] > depth[static_cast<size_t>(a)])
            b = wparent[static_cast<size_t>(b)];
        while (a != b) {
            a = wparent[static_cast<size_t>(a)];
            b = wparent[static_cast<size_t>(b)];
        }
        return a;
    };

    Embedding out{xi.xi, jt};
    for (size_t p = 0; p < t.size(); ++p) {
        const auto& vert = t.vertices[p];
        if (vert.kind != OutputAwareParseTree::Kind::Internal)
            continue;
        out.xi[p] = lca(xi.xi[static_cast<size_t>(vert.children[0])],
                        xi.xi[static_cast<size_t>(vert.children[1])]);
    }
    return out;
}

SvfEnumerator::SvfEnumerator(FlatValuation flat) : flat_(std::move(flat)) {
    if (flat_.functions.empty())
        throw PreconditionViolated("svf enumeration requires m >= 1");
    digits_.assign(flat_.functions.size() > 0 ? flat_.functions.size() - 1 : 0, 0);
}

unsigned long long SvfEnumerator::count_for(size_t m) {
    unsigned long long total = 1;
    for (size_t j = 1; j < m; ++j)
        total *= static_cast<unsigned long long>(2 * j - 1);
    return total;
}

void SvfEnumerator::reset() {
    std::fill(digits_.begin(), digits_.end(), 0);
    exhausted_ = false;
    started_ = false;
}

std::optional<StructuredValuation> SvfEnumerator::next() {
    if (exhausted_)
        return std::nullopt;
    if (!started_) {
        started_ = true;
    } else {
        // odometer over mixed radices (2j-1 positions when j leaves are placed)
        bool carried = true;
        for (size_t i = digits_.size(); i-- > 0;) {
            size_t radix = 2 * (i + 1) - 1;
            if (++digits_[i] < radix) {
                carried = false;
                break;
            }
            digits_[i] = 0;
        }
        if (carried) {
            exhausted_ = true;
            return std::nullopt;
        }
    }
    if (digits_.empty())
        exhausted_ = true; // m == 1: single tree
    return tree_at(digits_);
}

StructuredValuation SvfEnumerator::tree_at(const std::vector<size_t>& digits) const {
    StructuredValuation sv;
    sv.functions = flat_.functions;
    sv.nodes.push_back(StructuredValuation::Node{true, 0, flat_.op, -1, -1});
    sv.root = 0;

    for (size_t j = 1; j < flat_.functions.size(); ++j) {
        // positions: 0 = above root, then edges (parent,child) in pre-order
        std::vector<std::pair<int, int>> edges;
        std::function<void(int)> collect = [&](int n) {
            const auto& node = sv.nodes[static_cast<size_t>(n)];
            if (node.leaf)
                return;
            edges.emplace_back(n, node.left);
            collect(node.left);
            edges.emplace_back(n, node.right);
            collect(node.right);
        };
        collect(sv.root);

        size_t d = digits[j - 1];
        sv.nodes.push_back(StructuredValuation::Node{true, static_cast<int>(j), flat_.op, -1, -1});
        int leaf = static_cast<int>(sv.nodes.size()) - 1;
        if (d == 0) {
            sv.nodes.push_back(StructuredValuation::Node{false, -1, flat_.op, sv.root, leaf});
            sv.root = static_cast<int>(sv.nodes.size()) - 1;
        } else {
            auto [parent, child] = edges[d - 1];
            sv.nodes.push_back(StructuredValuation::Node{false, -1, flat_.op, child, leaf});
            int fresh = static_cast<int>(sv.nodes.size()) - 1;
            auto& pnode = sv.nodes[static_cast<size_t>(parent)];
            if (pnode.left == child)
                pnode.left = fresh;
            else
                pnode.right = fresh;
        }
    }
    return sv;
}

namespace {

struct RootedVert {
    VarSet label;
    int parent = -1;
    std::vector<int> children;
    int func = -1; // >= 0 marks a fresh function leaf
    bool fresh_root = false;
};

JoinTree to_join_tree(const std::vector<RootedVert>& verts, int root) {
    JoinTree jt;
    for (const auto& v : verts)
        jt.labels.push_back(v.label);
    for (size_t v = 0; v < verts.size(); ++v)
        if (verts[v].parent >= 0)
            jt.edges.emplace_back(static_cast<int>(v), verts[v].parent);
    jt.root = root;
    return jt;
}

} // namespace

std::pair<StructuredValuation, Embedding>
svf_from_tree_projection(const FlatValuation& f, const VarSet& o, const Hypergraph& ha) {
    auto witness = is_acyclic(ha);
    if (!witness)
        throw NotAcyclic("svf_from_tree_projection: hypergraph is cyclic");

    auto covering_edge = [&](const VarSet& need) -> int {
        for (int v = 0; v < static_cast<int>(witness->size()); ++v) {
            const auto& lab = witness->labels[static_cast<size_t>(v)];
            if (std::includes(lab.begin(), lab.end(), need.begin(), need.end()))
                return v;
        }
        return -1;
    };
    int p_o = covering_edge(o);
    if (p_o < 0)
        throw ConditionFailed('a', "no hyperedge covers the output variables");
    for (const auto& g : f.functions)
        if (covering_edge(g.vars) < 0)
            throw ConditionFailed('b', "no hyperedge covers weight function " + g.name);

    // Root the witness at p_o and copy into mutable rooted form.
    auto parent = root_tree(*witness, p_o);
    std::vector<RootedVert> verts(witness->size());
    for (size_t v = 0; v < witness->size(); ++v) {
        verts[v].label = witness->labels[v];
        verts[v].parent = parent[v];
        if (parent[v] >= 0)
            verts[static_cast<size_t>(parent[v])].children.push_back(static_cast<int>(v));
    }

    // Fresh leaf per weight function, attached below a covering vertex.
    std::vector<int> func_vertex(f.functions.size());
    for (size_t i = 0; i < f.functions.size(); ++i) {
        int host = covering_edge(f.functions[i].vars);
        RootedVert leaf;
        leaf.label = verts[static_cast<size_t>(host)].label;
        leaf.parent = host;
        leaf.func = static_cast<int>(i);
        verts.push_back(leaf);
        func_vertex[i] = static_cast<int>(verts.size()) - 1;
        verts[static_cast<size_t>(host)].children.push_back(func_vertex[i]);
    }
    // Fresh root above p_o.
    {
        RootedVert top;
        top.label = verts[static_cast<size_t>(p_o)].label;
        top.fresh_root = true;
        verts.push_back(top);
        int top_idx = static_cast<int>(verts.size()) - 1;
        verts[static_cast<size_t>(p_o)].parent = top_idx;
        verts[static_cast<size_t>(top_idx)].children.push_back(p_o);
    }
    int root = static_cast<int>(verts.size()) - 1;

    // Binarize: a vertex with children c1..cn (n > 2) keeps c1 and hands the
    // rest to a fresh copy of itself.
    for (size_t v = 0; v < verts.size(); ++v) {
        while (verts[v].children.size() > 2) {
            RootedVert copy;
            copy.label = verts[v].label;
            copy.parent = static_cast<int>(v);
            copy.children.assign(verts[v].children.begin() + 1, verts[v].children.end());
            verts.push_back(copy);
            int copy_idx = static_cast<int>(verts.size()) - 1;
            for (int c : verts[copy_idx].children)
                verts[static_cast<size_t>(c)].parent = copy_idx;
            verts[v].children.resize(1);
            verts[v].children.push_back(copy_idx);
        }
    }

    // Recursive split at the vertex closest to the root whose two child
    // subtrees both contain a function leaf.
    std::vector<int> mark_count(verts.size(), 0);
    std::function<int(int)> count_marks = [&](int v) -> int {
        int c = verts[static_cast<size_t>(v)].func >= 0 ? 1 : 0;
        for (int ch : verts[static_cast<size_t>(v)].children)
            c += count_marks(ch);
        mark_count[static_cast<size_t>(v)] = c;
        return c;
    };
    count_marks(root);

    StructuredValuation sv;
    sv.functions = f.functions;
    std::vector<int> xi_expr; // parse-tree-node -> join-tree vertex, built alongside

    std::function<int(int, std::vector<int>&)> build = [&](int v, std::vector<int>& node_targets) -> int {
        // descend while a single child subtree holds all marks
        while (true) {
            const auto& rv = verts[static_cast<size_t>(v)];
            if (rv.func >= 0 && mark_count[static_cast<size_t>(v)] == 1) {
                sv.nodes.push_back(StructuredValuation::Node{true, rv.func, f.op, -1, -1});
                node_targets.push_back(v);
                return static_cast<int>(sv.nodes.size()) - 1;
            }
            std::vector<int> carrying;
            for (int c : rv.children)
                if (mark_count[static_cast<size_t>(c)] > 0)
                    carrying.push_back(c);
            if (carrying.size() == 1 && mark_count[static_cast<size_t>(carrying[0])] ==
                                            mark_count[static_cast<size_t>(v)]) {
                v = carrying[0];
                continue;
            }
            assert(carrying.size() == 2);
            int ln = build(carrying[0], node_targets);
            int rn = build(carrying[1], node_targets);
            sv.nodes.push_back(StructuredValuation::Node{false, -1, f.op, ln, rn});
            node_targets.push_back(v);
            return static_cast<int>(sv.nodes.size()) - 1;
        }
    };
    std::vector<int> node_targets;
    sv.root = build(root, node_targets);

    JoinTree jt = to_join_tree(verts, root);
    OutputAwareParseTree t = build_output_aware_tree(sv, o);
    Embedding raw;
    raw.witness = jt;
    raw.xi.assign(t.size(), -1);
    // expression nodes were emitted in the same order by build_output_aware_tree's
    // post-order copy, so node_targets aligns with the first nodes of t
    assert(node_targets.size() + 1 == t.size());
    for (size_t i = 0; i < node_targets.size(); ++i)
        raw.xi[i] = node_targets[i];
    raw.xi[static_cast<size_t>(t.root)] = root;

    Embedding done = complete_embedding(raw, t, jt);
    return {sv, done};
}

} // namespace treeproj
