// maxsolver.cpp - ComputeMax and the promise-free algorithms built on it
#include "treeproj/maxsolver.hpp"

#include "treeproj/errors.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace treeproj {

const char* const kNoval = "%noval%";

SolveOutcome SolveOutcome::make_solution(Assignment a, Weight w, bool cert) {
    SolveOutcome out;
    out.status = Status::Solution;
    out.assignment = std::move(a);
    out.weight = std::move(w);
    out.certified = cert;
    return out;
}

SolveOutcome SolveOutcome::no_solution() {
    SolveOutcome out;
    out.status = Status::NoSolution;
    return out;
}

SolveOutcome SolveOutcome::fail(std::string reason) {
    SolveOutcome out;
    out.status = Status::Fail;
    out.fail_reason = std::move(reason);
    return out;
}

StructuredValuation subvaluation(const StructuredValuation& f, const OutputAwareParseTree& t,
                                 int vertex) {
    StructuredValuation sub;
    sub.functions = f.functions;
    std::function<int(int)> copy = [&](int v) -> int {
        const auto& vert = t.vertices[static_cast<size_t>(v)];
        if (vert.kind == OutputAwareParseTree::Kind::Root)
            return copy(vert.children[0]);
        if (vert.kind == OutputAwareParseTree::Kind::Leaf) {
            sub.nodes.push_back(StructuredValuation::Node{true, vert.func, OperatorKind::Sum, -1, -1});
            return static_cast<int>(sub.nodes.size()) - 1;
        }
        int l = copy(vert.children[0]);
        int r = copy(vert.children[1]);
        sub.nodes.push_back(StructuredValuation::Node{false, -1, vert.op, l, r});
        return static_cast<int>(sub.nodes.size()) - 1;
    };
    sub.root = copy(vertex);
    return sub;
}

std::map<std::vector<Tok>, Weight> marginalize_pair(const Relation& rel, size_t base_arity,
                                                    OperatorKind op) {
    std::map<std::vector<Tok>, Weight> out;
    size_t xr = rel.scope.size() - 2;
    size_t xt = rel.scope.size() - 1;
    for (const auto& row : rel.rows) {
        std::vector<Tok> key(row.begin(), row.begin() + static_cast<long>(base_arity));
        Weight w = apply(op, weight_from_tok(row[xr]), weight_from_tok(row[xt]));
        auto [it, fresh] = out.emplace(std::move(key), w);
        if (!fresh)
            it->second = weight_max(it->second, w);
    }
    return out;
}

Relation marginalize_keep_max(const Relation& rel, const std::string& weight_var) {
    int wcol = rel.col(weight_var);
    if (wcol < 0)
        throw Error("marginalize_keep_max: no column " + weight_var);
    std::map<std::vector<Tok>, std::pair<Weight, std::vector<Tok>>> best;
    for (const auto& row : rel.rows) {
        std::vector<Tok> key;
        key.reserve(row.size() - 1);
        for (size_t c = 0; c < row.size(); ++c)
            if (static_cast<int>(c) != wcol)
                key.push_back(row[c]);
        Weight w = weight_from_tok(row[static_cast<size_t>(wcol)]);
        auto it = best.find(key);
        if (it == best.end() || it->second.first < w)
            best[key] = {w, row};
    }
    Relation out;
    out.scope = rel.scope;
    for (auto& [key, val] : best)
        out.rows.push_back(std::move(val.second));
    out.normalize();
    return out;
}

std::pair<ViewSet, ViewDatabase> augment_views_with_variable(const ViewSet& v,
                                                             const ViewDatabase& vdb,
                                                             const std::string& x) {
    auto doms = view_active_domains(v, vdb);
    auto it = doms.find(x);
    if (it == doms.end())
        throw Error("augment_views_with_variable: unknown variable " + x);
    const auto& dom_x = it->second;

    ViewSet out = v;
    ViewDatabase odb;
    for (auto& w : out.views) {
        const Relation& r = vdb.relations.at(w.symbol);
        if (r.has_var(x)) {
            odb.relations.emplace(w.symbol, r);
            continue;
        }
        std::string augmented = w.symbol + "+" + x;
        odb.relations.emplace(augmented, cross_with_column(r, x, dom_x));
        for (auto& [atom, base] : out.base_view_of)
            if (base == w.symbol)
                base = augmented;
        w.symbol = augmented;
        w.scope.push_back(x);
    }
    return {std::move(out), std::move(odb)};
}

namespace {

std::string weight_var_name(const std::string& base_view, int node) {
    return "@X(" + base_view + "#" + std::to_string(node) + ")";
}

// One run of Figure 3's ComputeMax over a working database of view relations.
class ComputeMaxRun {
public:
    ComputeMaxRun(const CspInstance& inst, const StructuredValuation& f, const ViewSet& v,
                  const ViewDatabase& vdb, const VarSet& o, const SolverHooks* hooks)
        : f_(f), o_(o), hooks_(hooks) {
        (void)inst;
        for (const auto& w : v.views) {
            symbols_.push_back(w.symbol);
            db_.emplace(w.symbol, vdb.relations.at(w.symbol));
        }
    }

    SolveOutcome run() {
        // function views: projections of a covering view, one per leaf function
        for (size_t i = 0; i < f_.functions.size(); ++i) {
            const auto& fn = f_.functions[i];
            std::string host;
            for (const auto& s : symbols_) {
                const Relation& r = db_.at(s);
                bool ok = true;
                for (const auto& var : fn.vars)
                    if (!r.has_var(var)) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    host = s;
                    break;
                }
            }
            if (host.empty())
                return SolveOutcome::fail("no view covers weight function " + fn.name);
            std::string sym = "wfn[" + std::to_string(i) + ":" + fn.name + "]";
            db_.emplace(sym, project(db_.at(host), fn.vars));
            symbols_.push_back(sym);
            fn_view_.push_back(sym);
        }

        // step 1: pairwise consistency over V
        if (pairwise_fixpoint(db_, symbols_))
            return SolveOutcome::no_solution();

        // root view: first view covering O
        for (const auto& s : symbols_) {
            const Relation& r = db_.at(s);
            bool ok = true;
            for (const auto& var : o_)
                if (!r.has_var(var)) {
                    ok = false;
                    break;
                }
            if (ok) {
                w_o_ = s;
                break;
            }
        }
        if (w_o_.empty())
            return SolveOutcome::fail("no view covers the output variables");
        root_base_rel_ = project(db_.at(w_o_), o_);

        tree_ = build_output_aware_tree(f_, o_);
        auto order = tree_.postorder();
        newsep_.assign(tree_.size(), {});
        stage1_.assign(tree_.size(), {});
        stage2_.assign(tree_.size(), {});

        // leaf initialization
        for (int p : order) {
            const auto& vert = tree_.vertices[static_cast<size_t>(p)];
            if (vert.kind != OutputAwareParseTree::Kind::Leaf)
                continue;
            const auto& fn = f_.functions[static_cast<size_t>(vert.func)];
            const std::string& base = fn_view_[static_cast<size_t>(vert.func)];
            AugmentedView av;
            av.base = base;
            av.weight_vars = {weight_var_name(base, p)};
            av.symbol = "cand[" + std::to_string(p) + "|" + base + "]";
            const Relation& src = db_.at(base);
            Relation rel;
            rel.scope = src.scope;
            rel.scope.push_back(av.weight_vars[0]);
            for (size_t i = 0; i < src.rows.size(); ++i) {
                std::vector<Tok> row = src.rows[i];
                row.push_back(weight_tok(fn.eval(src.row_assignment(i))));
                rel.rows.push_back(std::move(row));
            }
            rel.normalize();
            db_.emplace(av.symbol, std::move(rel));
            if (hooks_ && hooks_->on_candidate)
                hooks_->on_candidate(p, base, db_.at(av.symbol), av.weight_vars[0]);
            newsep_[static_cast<size_t>(p)].push_back(std::move(av));
        }

        // main loop: evaluate then propagate, leaves to root
        for (size_t oi = 0; oi + 1 < order.size(); ++oi) {
            int p = order[oi];
            if (!evaluate_node(p))
                return SolveOutcome::fail("no candidate separators at parse vertex " +
                                          std::to_string(p));
            propagate_node(p);
        }
        if (!evaluate_root())
            return SolveOutcome::fail("no candidate separator at the root");

        // concluding step
        const AugmentedView& sel = newsep_[static_cast<size_t>(tree_.root)].front();
        const Relation& rel = db_.at(sel.symbol);
        if (rel.rows.empty())
            return SolveOutcome::fail("surviving root view is empty");
        int wcol = rel.col(sel.weight_vars[0]);
        Weight best = Weight::bottom();
        for (const auto& row : rel.rows)
            best = weight_max(best, weight_from_tok(row[static_cast<size_t>(wcol)]));
        std::vector<size_t> argmax;
        for (size_t i = 0; i < rel.rows.size(); ++i)
            if (weight_from_tok(rel.rows[i][static_cast<size_t>(wcol)]) == best)
                argmax.push_back(i);
        // lexicographically least assignment among the maxima
        size_t pick = argmax.front();
        for (size_t i : argmax) {
            std::vector<Tok> a, b;
            for (size_t c = 0; c + 1 < rel.scope.size(); ++c) {
                a.push_back(rel.rows[i][c]);
                b.push_back(rel.rows[pick][c]);
            }
            if (row_less_by_token(a, b))
                pick = i;
        }
        Assignment out;
        for (size_t c = 0; c + 1 < rel.scope.size(); ++c)
            out.bindings.emplace(rel.scope[c], tok_str(rel.rows[pick][c]));
        return SolveOutcome::make_solution(std::move(out), best, false);
    }

private:
    using StageMap = std::map<std::string, std::vector<AugmentedView>>; // child base -> targets

    bool is_root_vertex(int p) const { return p == tree_.root; }

    // evaluate: leaves are ready; internal vertices marginalize the pair views
    // and keep the views whose maximum weight attains the global minimum.
    bool evaluate_node(int p) {
        const auto& vert = tree_.vertices[static_cast<size_t>(p)];
        if (vert.kind == OutputAwareParseTree::Kind::Leaf)
            return !newsep_[static_cast<size_t>(p)].empty();

        struct Built {
            AugmentedView view;
            Weight max_weight;
        };
        std::vector<Built> built;
        for (const auto& w_p : symbols_) {
            const Relation& base_rel = db_.at(w_p);
            // best(theta, w) = min over sibling candidate pairs of marg
            std::vector<std::map<std::vector<Tok>, Weight>> margs;
            for (const auto& [pair_key, targets] : stage2_[static_cast<size_t>(p)]) {
                auto it = targets.find(w_p);
                if (it == targets.end())
                    continue;
                margs.push_back(marginalize_pair(db_.at(it->second), base_rel.arity(), vert.op));
            }
            if (margs.empty())
                return false; // no surviving child pair at all
            bool has_bottom = false;
            AugmentedView av;
            av.base = w_p;
            av.weight_vars = {weight_var_name(w_p, p)};
            av.symbol = "cand[" + std::to_string(p) + "|" + w_p + "]";
            Relation rel;
            rel.scope = base_rel.scope;
            rel.scope.push_back(av.weight_vars[0]);
            Weight maxw = Weight::bottom();
            for (const auto& row : base_rel.rows) {
                Weight bestw;
                bool first = true;
                for (const auto& m : margs) {
                    auto mi = m.find(row);
                    Weight w = mi == m.end() ? Weight::bottom() : mi->second;
                    bestw = first ? w : weight_min(bestw, w);
                    first = false;
                }
                if (bestw.is_bottom()) {
                    has_bottom = true;
                    break;
                }
                maxw = weight_max(maxw, bestw);
                std::vector<Tok> nr = row;
                nr.push_back(weight_tok(bestw));
                rel.rows.push_back(std::move(nr));
            }
            if (has_bottom)
                continue; // some assignment has no extension: not a separator
            rel.normalize();
            db_[av.symbol] = std::move(rel);
            if (hooks_ && hooks_->on_candidate)
                hooks_->on_candidate(p, w_p, db_.at(av.symbol), av.weight_vars[0]);
            built.push_back(Built{std::move(av), maxw});
        }
        if (built.empty())
            return false;
        Weight global_min = built.front().max_weight;
        for (const auto& b : built)
            global_min = weight_min(global_min, b.max_weight);
        auto& ns = newsep_[static_cast<size_t>(p)];
        for (auto& b : built)
            if (b.max_weight == global_min)
                ns.push_back(std::move(b.view));
        return !ns.empty();
    }

    // propagate candidate weights into the parent's stored views
    void propagate_node(int p) {
        int parent = tree_.vertices[static_cast<size_t>(p)].parent;
        bool to_root = is_root_vertex(parent);
        const auto& siblings = tree_.vertices[static_cast<size_t>(parent)].children;
        bool first_child = !to_root && siblings[0] == p;

        for (const auto& cand : newsep_[static_cast<size_t>(p)]) {
            const std::string& xvar = cand.weight_vars[0];
            std::vector<Tok> dom = column_values(db_.at(cand.symbol), xvar);

            // materialize the parent views this candidate feeds
            std::vector<std::string> targets;
            if (to_root) {
                AugmentedView rv;
                rv.base = w_o_;
                rv.weight_vars = {xvar};
                rv.symbol = "root[" + cand.base + "]";
                db_[rv.symbol] = cross_with_column(root_base_rel_, xvar, dom);
                targets.push_back(rv.symbol);
                root_candidates_.push_back(rv);
            } else if (first_child) {
                auto& slot = stage1_[static_cast<size_t>(parent)][cand.base];
                for (const auto& w_p : symbols_) {
                    AugmentedView tv;
                    tv.base = w_p;
                    tv.weight_vars = {xvar};
                    tv.symbol = "aug[" + std::to_string(parent) + "|" + w_p + "|" + cand.base + "]";
                    db_[tv.symbol] = cross_with_column(db_.at(w_p), xvar, dom);
                    targets.push_back(tv.symbol);
                    slot.push_back(std::move(tv));
                }
            } else {
                // second child: extend each surviving first-child stage with
                // this candidate's weight column
                for (const auto& [rbase, stage] : stage1_[static_cast<size_t>(parent)]) {
                    auto& slot = stage2_[static_cast<size_t>(parent)][{rbase, cand.base}];
                    for (const auto& tv1 : stage) {
                        AugmentedView tv;
                        tv.base = tv1.base;
                        tv.weight_vars = {tv1.weight_vars[0], xvar};
                        tv.symbol = tv1.symbol + "|" + cand.base;
                        db_[tv.symbol] = cross_with_column(db_.at(tv1.symbol), xvar, dom);
                        targets.push_back(tv.symbol);
                        slot.emplace(tv.base, tv.symbol);
                    }
                }
            }

            // carrier views transport the weight column across the view set
            std::vector<std::string> carriers;
            for (const auto& w_b : symbols_) {
                std::string sym = "car[" + w_b + "|" + xvar + "]";
                db_[sym] = cross_with_column(db_.at(w_b), xvar, dom);
                carriers.push_back(sym);
            }

            std::vector<std::string> participants = targets;
            participants.push_back(cand.symbol);
            participants.insert(participants.end(), carriers.begin(), carriers.end());
            pairwise_fixpoint(db_, participants, {cand.symbol});

            for (const auto& c : carriers)
                db_.erase(c);
            for (const auto& t : targets)
                db_[t] = marginalize_keep_max(db_.at(t), xvar);
        }

        // drop superseded first-stage relations once both children are done
        if (!to_root && !first_child) {
            for (auto& [rbase, stage] : stage1_[static_cast<size_t>(parent)])
                for (auto& tv : stage)
                    db_.erase(tv.symbol);
        }
    }

    // root evaluate: keep one pointwise-minimal view
    bool evaluate_root() {
        if (root_candidates_.empty())
            return false;
        size_t n = root_candidates_.size();
        auto weight_map = [&](const AugmentedView& av) {
            std::map<std::vector<Tok>, Weight> m;
            const Relation& rel = db_.at(av.symbol);
            int wcol = rel.col(av.weight_vars[0]);
            for (const auto& row : rel.rows) {
                std::vector<Tok> key;
                for (size_t c = 0; c < row.size(); ++c)
                    if (static_cast<int>(c) != wcol)
                        key.push_back(row[c]);
                m.emplace(std::move(key), weight_from_tok(row[static_cast<size_t>(wcol)]));
            }
            return m;
        };
        std::vector<std::map<std::vector<Tok>, Weight>> maps;
        maps.reserve(n);
        for (const auto& av : root_candidates_)
            maps.push_back(weight_map(av));

        for (size_t i = 0; i < n; ++i) {
            bool minimal = true;
            for (const auto& [key, w] : maps[i]) {
                for (size_t j = 0; j < n && minimal; ++j) {
                    if (j == i)
                        continue;
                    auto it = maps[j].find(key);
                    if (it != maps[j].end() && w > it->second)
                        minimal = false;
                }
                if (!minimal)
                    break;
            }
            if (minimal) {
                auto& ns = newsep_[static_cast<size_t>(tree_.root)];
                ns.push_back(root_candidates_[i]);
                if (hooks_ && hooks_->on_root)
                    hooks_->on_root(db_.at(root_candidates_[i].symbol),
                                    root_candidates_[i].weight_vars[0]);
                return true;
            }
        }
        return false;
    }

    StructuredValuation f_;
    VarSet o_;
    const SolverHooks* hooks_;

    std::vector<std::string> symbols_; // V, function views appended
    std::map<std::string, Relation> db_;
    std::vector<std::string> fn_view_;
    std::string w_o_;
    Relation root_base_rel_;
    OutputAwareParseTree tree_;
    std::vector<std::vector<AugmentedView>> newsep_;
    std::vector<StageMap> stage1_;
    // (first-child base, second-child base) -> base view -> stored view symbol
    std::vector<std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>>>
        stage2_;
    std::vector<AugmentedView> root_candidates_;
};

} // namespace

SolveOutcome compute_max_promise(const CspInstance& inst, const StructuredValuation& f,
                                 const ViewSet& v, const ViewDatabase& vdb, const VarSet& o,
                                 const SolverHooks* hooks) {
    ComputeMaxRun run(inst, f, v, vdb, o, hooks);
    return run.run();
}

SolveOutcome certified_max(const CspInstance& inst, const StructuredValuation& f, const ViewSet& v,
                           const ViewDatabase& vdb, const VarSet& o, const SolverHooks* hooks) {
    CspInstance cur = inst;
    ViewSet vs = v;
    ViewDatabase wdb = vdb;

    std::optional<Weight> z;
    Assignment total;
    for (const auto& x : inst.variables()) {
        auto [vx, vxdb] = augment_views_with_variable(vs, wdb, x);
        SolveOutcome step = compute_max_promise(cur, f, vx, vxdb, {x}, hooks);
        if (step.status == SolveOutcome::Status::NoSolution) {
            if (!z)
                return SolveOutcome::no_solution();
            // a later NO SOLUTION contradicts the earlier answers: the
            // promised embedding cannot exist
            return SolveOutcome::fail("depromisization: inconsistent NO SOLUTION after a solution");
        }
        if (step.status == SolveOutcome::Status::Fail)
            return step;
        if (!z) {
            z = step.weight;
        } else if (step.weight != *z) {
            return SolveOutcome::fail("depromisization: weight disagreement across variables");
        }
        const std::string& val = step.assignment.at(x);
        total.bindings[x] = val;
        Tok val_tok = tok(val);
        for (const auto& a : cur.formula)
            if (std::find(a.scope.begin(), a.scope.end(), x) != a.scope.end())
                cur.database[a.symbol] = select_eq(cur.database.at(a.symbol), x, val_tok);
        for (const auto& w : vs.views)
            if (wdb.relations.at(w.symbol).has_var(x))
                wdb.relations[w.symbol] = select_eq(wdb.relations.at(w.symbol), x, val_tok);
    }

    if (!z)
        return SolveOutcome::fail("depromisization: no variables");
    if (!inst.satisfies(total))
        return SolveOutcome::fail("verification: assembled assignment violates a constraint");
    if (f.evaluate(total) != *z)
        return SolveOutcome::fail("verification: assembled weight differs from the solver weight");
    return SolveOutcome::make_solution(total.restrict_to(o), *z, true);
}

FptOutcome fpt_max(const CspInstance& inst, const FlatValuation& f, const ViewSet& v,
                   const ViewDatabase& vdb, const VarSet& o, size_t parameter_budget) {
    if (f.functions.size() > parameter_budget)
        throw ParameterBudgetExceeded("fpt_max: valuation has " +
                                      std::to_string(f.functions.size()) +
                                      " weight functions, budget is " +
                                      std::to_string(parameter_budget));
    FptOutcome out;
    SvfEnumerator stream{f};
    while (auto sv = stream.next()) {
        ++out.trees_explored;
        SolveOutcome attempt = certified_max(inst, *sv, v, vdb, o);
        if (attempt.status != SolveOutcome::Status::Fail) {
            out.outcome = std::move(attempt);
            out.chosen = std::move(*sv);
            return out;
        }
    }
    out.outcome = SolveOutcome::fail("no structured form in svf(F) can be embedded");
    return out;
}

TopKStream::TopKStream(const CspInstance& inst, const StructuredValuation& f, const ViewSet& v,
                       const ViewDatabase& vdb, const VarSet& o, size_t k)
    : base_inst_(inst), base_views_(v), base_vdb_(vdb), f_(f), o_(o), remaining_(k) {
    o_order_.assign(o.begin(), o.end());
    domains_ = view_active_domains(base_views_, base_vdb_);
    // fresh unary atoms over the output variables; Lawler branching edits them
    for (const auto& x : o_order_) {
        Atom a;
        a.symbol = "atomX[" + x + "]";
        a.scope = {x};
        Relation r = Relation::empty({x});
        for (Tok t : domains_.at(x))
            r.rows.push_back({t});
        r.normalize();
        base_inst_.database.emplace(a.symbol, r);
        base_inst_.formula.push_back(a);

        Atom w;
        w.symbol = "w[" + a.symbol + "]";
        w.scope = {x};
        base_views_.base_view_of.emplace(a.symbol, w.symbol);
        base_vdb_.relations.emplace(w.symbol, std::move(r));
        base_views_.views.push_back(std::move(w));
    }
}

SolveOutcome TopKStream::solve_node(const Node& node) {
    CspInstance inst = base_inst_;
    ViewDatabase vdb = base_vdb_;
    for (const auto& x : o_order_) {
        Relation r = Relation::empty({x});
        auto fixed = node.fixed.find(x);
        if (fixed != node.fixed.end()) {
            r.rows.push_back({tok(fixed->second)});
        } else {
            auto excl = node.excluded.find(x);
            for (Tok t : domains_.at(x)) {
                if (excl != node.excluded.end() && excl->second.count(tok_str(t)))
                    continue;
                r.rows.push_back({t});
            }
        }
        r.normalize();
        inst.database["atomX[" + x + "]"] = r;
        vdb.relations["w[atomX[" + x + "]]"] = std::move(r);
    }
    return certified_max(inst, f_, base_views_, vdb, o_);
}

void TopKStream::push_candidate(const Node& node) {
    SolveOutcome out = solve_node(node);
    switch (out.status) {
    case SolveOutcome::Status::Solution:
        queue_.push_back(Entry{out.weight, out.assignment, node});
        break;
    case SolveOutcome::Status::NoSolution:
        break; // empty subspace
    case SolveOutcome::Status::Fail:
        failed_ = true;
        fail_reason_ = out.fail_reason;
        break;
    }
}

std::optional<TopKStream::Item> TopKStream::next() {
    unsigned long long ops_before = relational_op_count();
    if (failed_ || remaining_ == 0)
        return std::nullopt;
    if (!primed_) {
        primed_ = true;
        push_candidate(Node{});
        if (failed_)
            return std::nullopt;
    }
    if (queue_.empty())
        return std::nullopt;

    // max weight first; ties broken by lexicographically least assignment
    size_t best = 0;
    for (size_t i = 1; i < queue_.size(); ++i) {
        if (queue_[best].weight < queue_[i].weight ||
            (queue_[best].weight == queue_[i].weight &&
             queue_[i].assignment < queue_[best].assignment))
            best = i;
    }
    Entry top = std::move(queue_[best]);
    queue_.erase(queue_.begin() + static_cast<long>(best));

    // Lawler expansion: child i fixes the first i-1 output variables to the
    // emitted values and excludes the i-th one
    for (size_t i = 0; i < o_order_.size() && !failed_; ++i) {
        Node child = top.node;
        for (size_t j = 0; j < i; ++j)
            child.fixed[o_order_[j]] = top.assignment.at(o_order_[j]);
        child.excluded[o_order_[i]].insert(top.assignment.at(o_order_[i]));
        push_candidate(child);
    }

    --remaining_;
    last_delay_ops_ = relational_op_count() - ops_before;
    return Item{std::move(top.assignment), std::move(top.weight)};
}

std::vector<TopKStream::Item> top_k(const CspInstance& inst, const StructuredValuation& f,
                                    const ViewSet& v, const ViewDatabase& vdb, const VarSet& o,
                                    size_t k, bool* failed) {
    TopKStream stream(inst, f, v, vdb, o, k);
    std::vector<TopKStream::Item> out;
    while (auto item = stream.next())
        out.push_back(std::move(*item));
    if (failed)
        *failed = stream.failed();
    return out;
}

} // namespace treeproj
