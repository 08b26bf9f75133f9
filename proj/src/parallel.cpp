// parallel.cpp - shunt contraction machinery on the simulated DB-machine
#include "treeproj/parallel.hpp"

#include "treeproj/errors.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

namespace treeproj {

namespace {

struct RowHash {
    size_t operator()(const std::vector<Tok>& row) const {
        size_t h = 0x9e3779b97f4a7c15ULL;
        for (Tok t : row)
            h = h * 1099511628211ULL ^ static_cast<size_t>(static_cast<uint32_t>(t));
        return h;
    }
};

std::vector<int> columns_of(const std::vector<std::string>& scope,
                            const std::vector<std::string>& vars) {
    std::vector<int> idx;
    for (const auto& v : vars) {
        auto it = std::find(scope.begin(), scope.end(), v);
        idx.push_back(it == scope.end() ? -1 : static_cast<int>(it - scope.begin()));
    }
    return idx;
}

std::vector<Tok> pick(const std::vector<Tok>& row, const std::vector<int>& idx) {
    std::vector<Tok> out;
    out.reserve(idx.size());
    for (int c : idx)
        out.push_back(row[static_cast<size_t>(c)]);
    return out;
}

} // namespace

AnnotatedRelation AnnotatedRelation::from_relation(const Relation& r, const Weight& val) {
    AnnotatedRelation out;
    out.scope = r.scope;
    out.rows.reserve(r.rows.size());
    for (const auto& row : r.rows)
        out.rows.emplace_back(row, val);
    out.normalize();
    return out;
}

void AnnotatedRelation::normalize() {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first < b.first;
        return b.second < a.second; // max value first within a row group
    });
    std::vector<std::pair<std::vector<Tok>, Weight>> merged;
    for (auto& row : rows) {
        if (!merged.empty() && merged.back().first == row.first)
            continue; // duplicates keep the max val
        merged.push_back(std::move(row));
    }
    rows = std::move(merged);
}

int AnnotatedRelation::col(const std::string& v) const {
    auto it = std::find(scope.begin(), scope.end(), v);
    return it == scope.end() ? -1 : static_cast<int>(it - scope.begin());
}

AnnotatedRelation extended_join(const AnnotatedRelation& r1, const AnnotatedRelation& r2,
                                OperatorKind op) {
    std::vector<std::string> shared, r2_only;
    for (const auto& v : r2.scope) {
        if (std::find(r1.scope.begin(), r1.scope.end(), v) != r1.scope.end())
            shared.push_back(v);
        else
            r2_only.push_back(v);
    }
    AnnotatedRelation out;
    out.scope = r1.scope;
    out.scope.insert(out.scope.end(), r2_only.begin(), r2_only.end());

    auto key1 = columns_of(r1.scope, shared);
    auto key2 = columns_of(r2.scope, shared);
    auto extra2 = columns_of(r2.scope, r2_only);

    std::unordered_map<std::vector<Tok>, std::vector<size_t>, RowHash> index;
    for (size_t i = 0; i < r2.rows.size(); ++i)
        index[pick(r2.rows[i].first, key2)].push_back(i);

    for (const auto& [row1, val1] : r1.rows) {
        auto it = index.find(pick(row1, key1));
        if (it == index.end())
            continue;
        for (size_t j : it->second) {
            std::vector<Tok> row = row1;
            for (int c : extra2)
                row.push_back(r2.rows[j].first[static_cast<size_t>(c)]);
            out.rows.emplace_back(std::move(row), apply(op, val1, r2.rows[j].second));
        }
    }
    out.normalize();
    return out;
}

AnnotatedRelation extended_project(const AnnotatedRelation& r, const VarSet& x) {
    std::vector<std::string> kept(x.begin(), x.end());
    auto idx = columns_of(r.scope, kept);
    for (int c : idx)
        if (c < 0)
            throw Error("extended_project: variable not in scope");
    AnnotatedRelation out;
    out.scope = kept;
    for (const auto& [row, val] : r.rows)
        out.rows.emplace_back(pick(row, idx), val);
    out.normalize();
    return out;
}

namespace {

size_t slot_of(const std::vector<int>& children, int child) {
    for (size_t i = 0; i < children.size(); ++i)
        if (children[i] == child)
            return i;
    throw Error("slot_of: child not found");
}

// Unmarked-tree structure helpers. Unmarked vertices always have unmarked
// parents, so plain parent/depth work on them.
int unmarked_vertex_depth(const EJoinTree& t, int v) {
    int d = 0;
    int p = t.verts[static_cast<size_t>(v)].parent;
    while (p >= 0) {
        ++d;
        p = t.verts[static_cast<size_t>(p)].parent;
    }
    return d;
}

std::vector<int> unmarked_children(const EJoinTree& t, int v) {
    std::vector<int> out;
    for (int c : t.verts[static_cast<size_t>(v)].children)
        if (t.unmarked(c))
            out.push_back(c);
    return out;
}

void track_size(MachineStats& stats, size_t n) {
    stats.max_relation_size = std::max(stats.max_relation_size, n);
}

void check_factor_bound(const EJoinTree::Vertex& v, size_t d_bound, const char* where) {
    if (project(v.rel, v.ret).size() > d_bound)
        throw Error(std::string(where) + ": |pi_ret| exceeds the input bound d");
    if (project(v.rel, v.iet).size() > d_bound)
        throw Error(std::string(where) + ": |pi_iet| exceeds the input bound d");
    if (v.rel.size() > d_bound * d_bound)
        throw Error(std::string(where) + ": relation size exceeds d^2");
}

} // namespace

void shunt_gc(EJoinTree& t, int l, int w, std::vector<ShuntRecord>& store, MachineStats& stats,
              size_t d_bound, bool check_bounds) {
    auto& vl = t.verts[static_cast<size_t>(l)];
    if (!t.unmarked(l) || !unmarked_children(t, l).empty())
        throw PreconditionViolated("shunt: l is not an unmarked leaf");
    int p = vl.parent;
    if (p < 0)
        throw PreconditionViolated("shunt: l has no parent");
    auto& vp = t.verts[static_cast<size_t>(p)];
    auto pkids = unmarked_children(t, p);
    if (pkids.size() != 2)
        throw PreconditionViolated("shunt: parent is not binary in the unmarked tree");
    int s = pkids[0] == l ? pkids[1] : pkids[0];
    int q = vp.parent;
    if (q < 0)
        throw PreconditionViolated("shunt: l has depth <= 1");
    auto& vs = t.verts[static_cast<size_t>(s)];
    auto& vq = t.verts[static_cast<size_t>(q)];

    // C = rel(l) |><| (rel(p) semijoin rel(q)) |><| rel(s)
    Relation c = join(join(vl.rel, semijoin(vp.rel, vq.rel)), vs.rel);

    ShuntRecord rec;
    rec.step = w;
    rec.l = l;
    rec.p = p;
    rec.s = s;
    rec.q = q;
    rec.s_slot_in_p = static_cast<int>(slot_of(vp.children, s));
    rec.p_slot_in_q = static_cast<int>(slot_of(vq.children, p));
    rec.s_scope = vs.sch();
    rec.s_rel = project(c, rec.s_scope);
    track_size(stats, rec.s_rel.size());

    vl.mark = w;
    vp.mark = w;

    // restructure: s takes p's place under q; p hangs below s
    vq.children[static_cast<size_t>(rec.p_slot_in_q)] = s;
    vs.parent = q;
    vp.children.erase(vp.children.begin() + rec.s_slot_in_p);
    vs.children.push_back(p);
    vp.parent = s;

    // scopes: ret stays; iet(s) is rebuilt from what p shares with q
    VarSet iet_new;
    VarSet sch_p = vp.sch();
    for (const auto& x : vq.ret)
        if (sch_p.count(x) && !vs.ret.count(x))
            iet_new.insert(x);
    vs.iet = std::move(iet_new);

    vl.rel = project(c, vl.sch());
    vp.rel = project(c, vp.sch());
    vs.rel = project(c, vs.sch());
    track_size(stats, vl.rel.size());
    track_size(stats, vp.rel.size());
    track_size(stats, vs.rel.size());
    ++stats.shunt_count;

    if (check_bounds) {
        check_factor_bound(vl, d_bound, "shunt(l)");
        check_factor_bound(vp, d_bound, "shunt(p)");
        check_factor_bound(vs, d_bound, "shunt(s)");
        if (rec.s_rel.size() > d_bound * d_bound)
            throw Error("shunt(s_w): relation size exceeds d^2");
    }
    store.push_back(std::move(rec));
}

void r_shunt(EJoinTree& t, const ShuntRecord& rec, MachineStats& stats) {
    auto& vl = t.verts[static_cast<size_t>(rec.l)];
    auto& vp = t.verts[static_cast<size_t>(rec.p)];
    if (!vl.mark || !vp.mark || *vl.mark != rec.step || *vp.mark != rec.step)
        throw PreconditionViolated("r-shunt: marks do not match the record");
    int s = vp.parent;
    if (s != rec.s || !t.unmarked(s))
        throw PreconditionViolated("r-shunt: parent of p is not the recorded unmarked s");
    auto& vs = t.verts[static_cast<size_t>(s)];
    int q = vs.parent;
    if (q != rec.q || !t.unmarked(q))
        throw PreconditionViolated("r-shunt: parent of s is not the recorded unmarked q");
    auto& vq = t.verts[static_cast<size_t>(q)];

    // rel'(p) = pi_ret(p)( rel(q) |>< rel(p) >< (Rel(s_w) >< rel(s)) )
    Relation witnesses = semijoin(rec.s_rel, vs.rel);
    Relation reduced_p = semijoin(semijoin(vp.rel, vq.rel), witnesses);
    vp.rel = project(reduced_p, vp.ret);
    vp.iet.clear();
    // rel'(l) = pi_ret(l)( rel'(p) |>< rel(l) )
    vl.rel = project(semijoin(vl.rel, vp.rel), vl.ret);
    vl.iet.clear();
    vl.mark.reset();
    vp.mark.reset();

    // undo the restructuring: p back under q, s back under p
    vq.children[static_cast<size_t>(rec.p_slot_in_q)] = rec.p;
    vp.parent = q;
    vs.children.erase(std::find(vs.children.begin(), vs.children.end(), rec.p));
    vp.children.insert(vp.children.begin() + rec.s_slot_in_p, s);
    vs.parent = rec.p;

    track_size(stats, vp.rel.size());
    track_size(stats, vl.rel.size());
    ++stats.shunt_count;
}

namespace {

struct BatchPlan {
    std::vector<int> leaves;
};

// Odd-labeled unmarked leaves at depth > 1 that sit on the requested side of
// their parent. Eligibility is computed before any shunt of the batch runs.
BatchPlan plan_batch(const EJoinTree& t, const std::map<int, int>& labels, bool left_side) {
    BatchPlan plan;
    for (int v : t.unmarked_leaves()) {
        auto it = labels.find(v);
        if (it == labels.end() || it->second % 2 == 0)
            continue;
        if (unmarked_vertex_depth(t, v) <= 1)
            continue;
        int parent = t.verts[static_cast<size_t>(v)].parent;
        auto kids = unmarked_children(t, parent);
        bool is_left = kids.size() == 2 && kids[0] == v;
        if (is_left == left_side)
            plan.leaves.push_back(v);
    }
    return plan;
}

void assert_disjoint_neighborhoods(const EJoinTree& t, const std::vector<int>& leaves) {
    std::set<int> touched;
    for (int l : leaves) {
        int p = t.verts[static_cast<size_t>(l)].parent;
        auto kids = unmarked_children(t, p);
        int s = kids[0] == l ? kids[1] : kids[0];
        int q = t.verts[static_cast<size_t>(p)].parent;
        for (int v : {l, p, s, q})
            if (!touched.insert(v).second)
                throw Error("shunt batch touches a vertex twice");
    }
}

unsigned long long batch_steps(size_t batch, int processors) {
    if (batch == 0)
        return 0;
    return (batch + static_cast<size_t>(processors) - 1) / static_cast<size_t>(processors);
}

} // namespace

std::pair<CspInstance, MachineStats> global_consistency(const CspInstance& inst, const EJoinTree& t0,
                                                        const MachineConfig& cfg) {
    EJoinTree t = t0;
    MachineStats stats;
    stats.processors = cfg.processors;
    size_t d = 0;
    for (const auto& v : t.verts)
        d = std::max(d, v.rel.size());

    std::map<int, int> labels;
    for (int v = 0; v < static_cast<int>(t.size()); ++v)
        if (t.verts[static_cast<size_t>(v)].leaf_label)
            labels[v] = *t.verts[static_cast<size_t>(v)].leaf_label;

    std::vector<ShuntRecord> store;
    int mark = 0;

    // ascending phase
    while (t.unmarked_depth() > 1) {
        for (bool left : {true, false}) {
            ++mark;
            BatchPlan plan = plan_batch(t, labels, left);
            assert_disjoint_neighborhoods(t, plan.leaves);
            for (int l : plan.leaves) {
                shunt_gc(t, l, mark, store, stats, d, cfg.check_bounds);
                labels.erase(l); // marked leaves retire their label
            }
            unsigned long long steps = batch_steps(plan.leaves.size(), cfg.processors);
            stats.parallel_steps += steps;
            stats.ascending_steps += steps;
        }
        for (auto& [v, lab] : labels)
            if (t.unmarked(v))
                lab >>= 1; // shift out the rightmost bit
    }

    // root update and its children
    int root = t.root;
    auto kids = unmarked_children(t, root);
    if (kids.size() != 2)
        throw Error("global_consistency: contraction did not end with two root children");
    auto& vroot = t.verts[static_cast<size_t>(root)];
    auto& vc1 = t.verts[static_cast<size_t>(kids[0])];
    auto& vc2 = t.verts[static_cast<size_t>(kids[1])];
    vroot.rel = semijoin(semijoin(vroot.rel, vc1.rel), vc2.rel);
    track_size(stats, vroot.rel.size());
    for (auto* child : {&vc1, &vc2}) {
        child->rel = project(semijoin(child->rel, vroot.rel), child->ret);
        child->iet.clear();
        track_size(stats, child->rel.size());
    }

    // descending phase
    for (int w = mark; w >= 1; --w) {
        std::vector<const ShuntRecord*> batch;
        for (const auto& rec : store)
            if (rec.step == w)
                batch.push_back(&rec);
        for (const ShuntRecord* rec : batch)
            r_shunt(t, *rec, stats);
        unsigned long long steps = batch_steps(batch.size(), cfg.processors);
        stats.parallel_steps += steps;
        stats.descending_steps += steps;
    }

    // collect the reducts per constraint (first vertex hosting each atom)
    CspInstance out;
    out.formula = inst.formula;
    std::map<std::string, const EJoinTree::Vertex*> host;
    for (const auto& v : t.verts)
        host.emplace(v.atom, &v);
    for (const auto& a : inst.formula) {
        const Relation& r = host.at(a.symbol)->rel;
        Relation final_rel = Relation::empty(a.scope);
        std::vector<int> idx;
        for (const auto& var : a.scope)
            idx.push_back(r.col(var));
        for (const auto& row : r.rows) {
            std::vector<Tok> nr;
            for (int c : idx)
                nr.push_back(row[static_cast<size_t>(c)]);
            final_rel.rows.push_back(std::move(nr));
        }
        final_rel.normalize();
        out.database[a.symbol] = std::move(final_rel);
    }
    return {std::move(out), stats};
}

namespace {

struct AcqState {
    EJoinTree tree; // structure + scopes; relations live in ann
    std::vector<AnnotatedRelation> ann;
    std::vector<char> deleted;
    OperatorKind op;
    VarSet output;

    bool alive(int v) const { return !deleted[static_cast<size_t>(v)]; }
};

void track_weight(MachineStats& stats, const AnnotatedRelation& r) {
    for (const auto& [row, val] : r.rows) {
        if (val.is_finite()) {
            Rational mag = val.value() < 0 ? Rational(-val.value()) : val.value();
            if (stats.max_weight_magnitude < mag)
                stats.max_weight_magnitude = mag;
        }
    }
}

// extended shunt: l and p are removed, s absorbs their join and keeps every
// output variable that would otherwise disappear
void shunt_acq(AcqState& st, int l, MachineStats& stats, std::vector<AcqLogEntry>* log) {
    auto& t = st.tree;
    auto& vl = t.verts[static_cast<size_t>(l)];
    int p = vl.parent;
    auto& vp = t.verts[static_cast<size_t>(p)];
    auto pkids = vp.children;
    if (pkids.size() != 2)
        throw PreconditionViolated("acq shunt: parent is not binary");
    int s = pkids[0] == l ? pkids[1] : pkids[0];
    int q = vp.parent;
    if (q < 0)
        throw PreconditionViolated("acq shunt: l has depth <= 1");
    auto& vs = t.verts[static_cast<size_t>(s)];
    auto& vq = t.verts[static_cast<size_t>(q)];

    AnnotatedRelation joined = extended_join(
        extended_join(st.ann[static_cast<size_t>(l)], st.ann[static_cast<size_t>(p)], st.op),
        st.ann[static_cast<size_t>(s)], st.op);

    // Theorem-12 instrumentation: with global consistency, no tuple of an
    // output-carrying relation is lost by the contraction join.
    for (int v : {l, p, s}) {
        const auto& vert = t.verts[static_cast<size_t>(v)];
        if (vert.oet.empty())
            continue;
        AnnotatedRelation back = extended_project(joined, vert.sch());
        if (back.size() != st.ann[static_cast<size_t>(v)].size())
            throw Error("acq: a tuple of an output-carrying relation was deleted");
    }

    VarSet sch_l = vl.sch(), sch_p = vp.sch(), sch_s = vs.sch();

    VarSet iet_new;
    for (const auto& x : vq.ret)
        if (sch_p.count(x) && !vs.ret.count(x))
            iet_new.insert(x);
    VarSet oet_new;
    for (const auto* sc : {&sch_l, &sch_p, &sch_s})
        for (const auto& x : *sc)
            if (st.output.count(x) && !vs.ret.count(x) && !iet_new.count(x))
                oet_new.insert(x);

    AcqLogEntry entry;
    if (log) {
        entry.l = l;
        entry.p = p;
        entry.s = s;
        entry.rel_l = st.ann[static_cast<size_t>(l)];
        entry.rel_p = st.ann[static_cast<size_t>(p)];
        entry.rel_s = st.ann[static_cast<size_t>(s)];
    }

    vs.iet = std::move(iet_new);
    vs.oet = std::move(oet_new);
    st.ann[static_cast<size_t>(s)] = extended_project(joined, vs.sch());
    track_size(stats, st.ann[static_cast<size_t>(s)].size());
    track_weight(stats, st.ann[static_cast<size_t>(s)]);
    ++stats.shunt_count;

    // delete l and p; s takes p's place under q
    st.deleted[static_cast<size_t>(l)] = 1;
    st.deleted[static_cast<size_t>(p)] = 1;
    vq.children[slot_of(vq.children, p)] = s;
    vs.parent = q;

    if (log) {
        entry.new_s_scope = vs.sch();
        entry.new_s_rel = st.ann[static_cast<size_t>(s)];
        log->push_back(std::move(entry));
    }
}

int acq_depth(const AcqState& st, int v) {
    int d = 0;
    int p = st.tree.verts[static_cast<size_t>(v)].parent;
    while (p >= 0) {
        ++d;
        p = st.tree.verts[static_cast<size_t>(p)].parent;
    }
    return d;
}

int acq_tree_depth(const AcqState& st) {
    std::function<int(int)> depth = [&](int v) -> int {
        int d = 0;
        for (int c : st.tree.verts[static_cast<size_t>(v)].children)
            d = std::max(d, 1 + depth(c));
        return d;
    };
    return depth(st.tree.root);
}

std::vector<int> acq_leaves(const AcqState& st) {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(st.tree.size()); ++v)
        if (st.alive(v) && st.tree.verts[static_cast<size_t>(v)].children.empty())
            out.push_back(v);
    return out;
}

} // namespace

std::pair<AnnotatedRelation, MachineStats> acq(const CspInstance& inst, const FlatValuation& f,
                                               const VarSet& o, const EJoinTree& t,
                                               const MachineConfig& cfg,
                                               std::vector<AcqLogEntry>* log) {
    if (!is_globally_consistent(inst))
        throw NotGloballyConsistent("acq requires a globally consistent instance");

    AcqState st;
    st.tree = t;
    st.op = f.op;
    st.output = o;
    st.deleted.assign(t.size(), 0);
    for (auto& v : st.tree.verts) {
        v.iet.clear();
        v.oet.clear();
        v.mark.reset();
    }

    // assign every weight function to the first covering vertex in the
    // left-to-right (in-order) traversal; several functions on one vertex
    // combine via the operator
    std::vector<int> order;
    std::function<void(int)> inorder = [&](int v) {
        const auto& kids = st.tree.verts[static_cast<size_t>(v)].children;
        if (!kids.empty())
            inorder(kids[0]);
        order.push_back(v);
        for (size_t i = 1; i < kids.size(); ++i)
            inorder(kids[i]);
    };
    inorder(st.tree.root);

    std::map<int, std::vector<size_t>> assigned;
    for (size_t fi = 0; fi < f.functions.size(); ++fi) {
        const auto& fn = f.functions[fi];
        int host = -1;
        for (int v : order) {
            const auto& ret = st.tree.verts[static_cast<size_t>(v)].ret;
            if (std::includes(ret.begin(), ret.end(), fn.vars.begin(), fn.vars.end())) {
                host = v;
                break;
            }
        }
        if (host < 0)
            throw UncoveredFunction("acq: no vertex covers weight function " + fn.name);
        assigned[host].push_back(fi);
    }

    MachineStats stats;
    stats.processors = cfg.processors;
    st.ann.resize(st.tree.size());
    for (size_t v = 0; v < st.tree.size(); ++v) {
        const Relation& r = st.tree.verts[v].rel;
        auto it = assigned.find(static_cast<int>(v));
        if (it == assigned.end()) {
            st.ann[v] = AnnotatedRelation::from_relation(r, neutral(f.op));
        } else {
            AnnotatedRelation ar;
            ar.scope = r.scope;
            for (size_t i = 0; i < r.rows.size(); ++i) {
                Assignment theta = r.row_assignment(i);
                Weight w = f.functions[it->second.front()].eval(theta);
                for (size_t j = 1; j < it->second.size(); ++j)
                    w = apply(f.op, w, f.functions[it->second[j]].eval(theta));
                ar.rows.emplace_back(r.rows[i], w);
            }
            ar.normalize();
            st.ann[v] = std::move(ar);
        }
        track_weight(stats, st.ann[v]);
        track_size(stats, st.ann[v].size());
    }

    std::map<int, int> labels;
    for (int v = 0; v < static_cast<int>(st.tree.size()); ++v)
        if (st.tree.verts[static_cast<size_t>(v)].leaf_label)
            labels[v] = *st.tree.verts[static_cast<size_t>(v)].leaf_label;

    while (acq_tree_depth(st) > 1) {
        for (bool left : {true, false}) {
            std::vector<int> batch;
            for (int v : acq_leaves(st)) {
                auto it = labels.find(v);
                if (it == labels.end() || it->second % 2 == 0)
                    continue;
                if (acq_depth(st, v) <= 1)
                    continue;
                const auto& kids =
                    st.tree.verts[static_cast<size_t>(st.tree.verts[static_cast<size_t>(v)].parent)]
                        .children;
                if ((kids[0] == v) == left)
                    batch.push_back(v);
            }
            for (int l : batch) {
                shunt_acq(st, l, stats, log);
                labels.erase(l);
            }
            unsigned long long steps = batch_steps(batch.size(), cfg.processors);
            stats.parallel_steps += steps;
            stats.ascending_steps += steps;
        }
        for (auto& [v, lab] : labels)
            if (st.alive(v))
                lab >>= 1;
    }

    int root = st.tree.root;
    const auto& kids = st.tree.verts[static_cast<size_t>(root)].children;
    if (kids.size() != 2)
        throw Error("acq: contraction did not end with two root children");
    AnnotatedRelation final_join = extended_join(
        extended_join(st.ann[static_cast<size_t>(root)], st.ann[static_cast<size_t>(kids[0])],
                      st.op),
        st.ann[static_cast<size_t>(kids[1])], st.op);
    AnnotatedRelation out = extended_project(final_join, o);
    track_size(stats, out.size());
    track_weight(stats, out);

    if (log) {
        AcqLogEntry entry;
        entry.final_step = true;
        entry.l = root;
        entry.p = kids[0];
        entry.s = kids[1];
        entry.rel_l = st.ann[static_cast<size_t>(root)];
        entry.rel_p = st.ann[static_cast<size_t>(kids[0])];
        entry.rel_s = st.ann[static_cast<size_t>(kids[1])];
        entry.new_s_rel = out;
        log->push_back(std::move(entry));
    }
    return {std::move(out), stats};
}

namespace {

// Backward pass over the contraction log: maintain one chosen (row, value)
// per live vertex plus a global partial assignment, and at each undone shunt
// re-select a consistent triple attaining the recorded value exactly.
struct Extractor {
    OperatorKind op;
    std::map<std::string, Tok> theta;
    std::map<int, std::pair<std::vector<Tok>, Weight>> chosen; // vertex -> chosen row and value

    // rows in token-lexicographic order: ties resolve to the least tuple
    static std::vector<const std::pair<std::vector<Tok>, Weight>*>
    ordered_rows(const AnnotatedRelation& r) {
        std::vector<const std::pair<std::vector<Tok>, Weight>*> out;
        out.reserve(r.rows.size());
        for (const auto& row : r.rows)
            out.push_back(&row);
        std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
            return row_less_by_token(a->first, b->first);
        });
        return out;
    }

    bool bind_row(const std::vector<std::string>& scope, const std::vector<Tok>& row,
                  std::vector<std::string>& added) {
        for (size_t c = 0; c < scope.size(); ++c) {
            auto it = theta.find(scope[c]);
            if (it == theta.end()) {
                theta.emplace(scope[c], row[c]);
                added.push_back(scope[c]);
            } else if (it->second != row[c]) {
                return false;
            }
        }
        return true;
    }

    void unbind(const std::vector<std::string>& added) {
        for (const auto& v : added)
            theta.erase(v);
    }

    bool undo(std::vector<AcqLogEntry>::const_reverse_iterator it,
              std::vector<AcqLogEntry>::const_reverse_iterator end, const Weight& target_root) {
        if (it == end)
            return true;
        const AcqLogEntry& e = *it;

        // target value for this entry
        Weight target;
        if (e.final_step) {
            target = target_root;
        } else {
            auto ch = chosen.find(e.s);
            if (ch == chosen.end())
                throw Error("extract: no chosen tuple for vertex");
            target = ch->second.second;
        }

        auto try_triple = [&](const std::pair<std::vector<Tok>, Weight>& rl,
                              const std::pair<std::vector<Tok>, Weight>& rp,
                              const std::pair<std::vector<Tok>, Weight>& rs) -> bool {
            if (apply(op, apply(op, rl.second, rp.second), rs.second) != target)
                return false;
            std::vector<std::string> added;
            bool ok = bind_row(e.rel_l.scope, rl.first, added) &&
                      bind_row(e.rel_p.scope, rp.first, added) &&
                      bind_row(e.rel_s.scope, rs.first, added);
            if (!ok) {
                unbind(added);
                return false;
            }
            auto saved_l = chosen.count(e.l) ? std::optional(chosen.at(e.l)) : std::nullopt;
            auto saved_p = chosen.count(e.p) ? std::optional(chosen.at(e.p)) : std::nullopt;
            auto saved_s = chosen.count(e.s) ? std::optional(chosen.at(e.s)) : std::nullopt;
            chosen[e.l] = rl;
            chosen[e.p] = rp;
            chosen[e.s] = rs;
            if (undo(std::next(it), end, target_root))
                return true;
            if (saved_l)
                chosen[e.l] = *saved_l;
            else
                chosen.erase(e.l);
            if (saved_p)
                chosen[e.p] = *saved_p;
            else
                chosen.erase(e.p);
            if (saved_s)
                chosen[e.s] = *saved_s;
            else
                chosen.erase(e.s);
            unbind(added);
            return false;
        };

        for (const auto* rl : ordered_rows(e.rel_l))
            for (const auto* rp : ordered_rows(e.rel_p))
                for (const auto* rs : ordered_rows(e.rel_s))
                    if (try_triple(*rl, *rp, *rs))
                        return true;
        return false;
    }
};

} // namespace

std::pair<Assignment, Weight> extract_one_best(const CspInstance& inst, const FlatValuation& f,
                                               const EJoinTree& t, const MachineConfig& cfg) {
    std::vector<AcqLogEntry> log;
    auto [best_rel, stats] = acq(inst, f, {}, t, cfg, &log);
    if (best_rel.rows.empty())
        throw NoSolutionError("extract_one_best: instance is unsatisfiable");
    Weight vstar = best_rel.rows.front().second;

    Extractor ex;
    ex.op = f.op;
    if (!ex.undo(log.rbegin(), log.rend(), vstar))
        throw Error("extract_one_best: no consistent optimum trace found");

    Assignment theta;
    for (const auto& [var, tokv] : ex.theta)
        theta.bindings.emplace(var, tok_str(tokv));
    if (!inst.satisfies(theta))
        throw Error("extract_one_best: extracted assignment violates a constraint");
    if (f.evaluate(theta) != vstar)
        throw Error("extract_one_best: extracted assignment misses the optimal value");
    return {std::move(theta), vstar};
}

} // namespace treeproj
