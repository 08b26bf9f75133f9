// test_model.cpp - relational algebra and hypergraph core
#include "treeproj/model.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace treeproj;

namespace {

Relation make_rel(std::vector<std::string> scope, std::vector<std::vector<std::string>> rows) {
    Relation r = Relation::empty(std::move(scope));
    for (const auto& row : rows)
        r.add_row(row);
    r.normalize();
    return r;
}

Hypergraph hg(std::vector<std::vector<std::string>> edges) {
    Hypergraph h;
    for (const auto& e : edges) {
        VarSet s(e.begin(), e.end());
        h.nodes.insert(s.begin(), s.end());
        h.edges.insert(std::move(s));
    }
    return h;
}

// naive nested-loop oracles for the relational operations
Relation naive_join(const Relation& r1, const Relation& r2) {
    Relation out;
    out.scope = r1.scope;
    for (const auto& v : r2.scope)
        if (!r1.has_var(v))
            out.scope.push_back(v);
    for (const auto& a : r1.rows) {
        for (const auto& b : r2.rows) {
            bool ok = true;
            for (size_t i = 0; i < r1.scope.size() && ok; ++i) {
                int c = r2.col(r1.scope[i]);
                if (c >= 0 && b[static_cast<size_t>(c)] != a[i])
                    ok = false;
            }
            if (!ok)
                continue;
            std::vector<Tok> row = a;
            for (size_t i = 0; i < r2.scope.size(); ++i)
                if (!r1.has_var(r2.scope[i]))
                    row.push_back(b[i]);
            out.rows.push_back(std::move(row));
        }
    }
    out.normalize();
    return out;
}

} // namespace

TEST_CASE("hypergraph of the running 4-atom formula") {
    std::vector<Atom> formula{{"r1", {"A", "B"}}, {"r2", {"B", "C"}}, {"r3", {"A", "C"}},
                              {"r4", {"C", "D"}}};
    Hypergraph h = hypergraph_of(formula);
    CHECK(h.nodes == VarSet{"A", "B", "C", "D"});
    CHECK(h.edges.size() == 4);
    CHECK(h.edges.count(VarSet{"A", "B"}) == 1);
    CHECK(h.edges.count(VarSet{"C", "D"}) == 1);
}

TEST_CASE("hypergraph of a single atom") {
    Hypergraph h = hypergraph_of({{"r", {"A"}}});
    CHECK(h.nodes == VarSet{"A"});
    CHECK(h.edges == std::set<VarSet>{{"A"}});
}

TEST_CASE("identical scopes collapse to one hyperedge") {
    Hypergraph h = hypergraph_of({{"r1", {"A", "B"}}, {"r2", {"A", "B"}}});
    CHECK(h.edges.size() == 1);
}

TEST_CASE("acyclicity: the 4-atom cycle is cyclic, its absorbed version is not") {
    Hypergraph h1 = hg({{"A", "B"}, {"B", "C"}, {"A", "C"}, {"C", "D"}});
    CHECK_FALSE(is_acyclic(h1).has_value());

    Hypergraph ha = hg({{"A", "B", "C"}, {"A", "B"}, {"B", "C"}, {"A", "C"}, {"C", "D"}});
    auto jt = is_acyclic(ha);
    REQUIRE(jt.has_value());
    CHECK(check_join_tree(*jt, ha));
}

TEST_CASE("acyclicity: single hyperedge") {
    Hypergraph h = hg({{"A", "B"}});
    auto jt = is_acyclic(h);
    REQUIRE(jt.has_value());
    CHECK(jt->size() == 1);
    CHECK(check_join_tree(*jt, h));
}

TEST_CASE("acyclic witnesses pass check_join_tree on random acyclic hypergraphs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        // grow a random connected acyclic hypergraph via a tree of bags
        std::vector<VarSet> bags;
        int vars = 0;
        bags.push_back({"v0", "v1"});
        vars = 2;
        int n = 2 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            const VarSet& parent = bags[rng() % bags.size()];
            VarSet bag;
            for (const auto& x : parent)
                if (rng() % 2)
                    bag.insert(x);
            int fresh = 1 + static_cast<int>(rng() % 2);
            for (int f = 0; f < fresh; ++f)
                bag.insert("v" + std::to_string(vars++));
            bags.push_back(bag);
        }
        Hypergraph h;
        for (auto& b : bags) {
            h.nodes.insert(b.begin(), b.end());
            h.edges.insert(b);
        }
        auto jt = is_acyclic(h);
        REQUIRE(jt.has_value());
        CHECK(check_join_tree(*jt, h));
    }
}

TEST_CASE("check_join_tree rejects bad labelings") {
    Hypergraph h = hg({{"A", "B"}, {"B", "C"}, {"C", "D"}});
    JoinTree jt;
    jt.labels = {{"A", "B"}, {"C", "D"}};
    jt.edges = {{0, 1}};
    CHECK_FALSE(check_join_tree(jt, h)); // BC uncovered

    JoinTree path;
    path.labels = {{"A", "B"}, {"C", "D"}, {"A", "B"}};
    path.edges = {{0, 1}, {1, 2}};
    Hypergraph h2 = hg({{"A", "B"}, {"C", "D"}});
    CHECK_FALSE(check_join_tree(path, h2)); // A occurrences disconnected
}

TEST_CASE("covers: reflexive, transitive, and the running example") {
    Hypergraph h1 = hg({{"A", "B"}, {"B", "C"}, {"A", "C"}, {"C", "D"}});
    Hypergraph ha = hg({{"A", "B", "C"}, {"A", "B"}, {"B", "C"}, {"A", "C"}, {"C", "D"}});
    Hypergraph h2 = hg({{"A", "B", "C"}, {"A", "B", "D"}, {"A", "C", "D"}, {"B", "C", "D"},
                        {"A", "B"}, {"B", "C"}, {"A", "C"}, {"C", "D"}});
    CHECK(covers(h1, ha));
    CHECK(covers(h1, h1));
    CHECK(covers(ha, ha));
    CHECK_FALSE(covers(hg({{"A", "B", "C"}}), hg({{"A", "B"}, {"B", "C"}})));

    CHECK(is_tree_projection(ha, h1, h2));
    CHECK_FALSE(is_tree_projection(h1, h1, h2)); // h1 itself is cyclic

    Hypergraph self = hg({{"A", "B"}, {"B", "C"}});
    CHECK(is_tree_projection(self, self, self));
}

TEST_CASE("covers transitivity on sampled triples") {
    std::mt19937_64 rng(11);
    auto random_hg = [&]() {
        std::vector<std::string> pool{"A", "B", "C", "D", "E"};
        Hypergraph h;
        int n = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i) {
            VarSet e;
            for (const auto& v : pool)
                if (rng() % 2)
                    e.insert(v);
            if (e.empty())
                e.insert(pool[rng() % pool.size()]);
            h.nodes.insert(e.begin(), e.end());
            h.edges.insert(e);
        }
        return h;
    };
    for (int i = 0; i < 200; ++i) {
        Hypergraph a = random_hg(), b = random_hg(), c = random_hg();
        if (covers(a, b) && covers(b, c))
            CHECK(covers(a, c));
    }
}

TEST_CASE("join/project/semijoin basics") {
    Relation r1 = make_rel({"A", "B"}, {{"0", "0"}, {"1", "1"}});
    Relation r2 = make_rel({"B", "C"}, {{"0", "0"}, {"1", "1"}});
    Relation j = join(r1, r2);
    CHECK(j.scope == std::vector<std::string>{"A", "B", "C"});
    CHECK(j.size() == 2);
    CHECK(j.contains({tok("0"), tok("0"), tok("0")}));
    CHECK(j.contains({tok("1"), tok("1"), tok("1")}));

    Relation p = project(r1, VarSet(r1.scope.begin(), r1.scope.end()));
    CHECK(p.rows == r1.rows);

    Relation other = make_rel({"X"}, {{"5"}});
    CHECK(semijoin(r1, other).size() == r1.size()); // disjoint scopes, non-empty
    Relation none = make_rel({"X"}, {});
    CHECK(semijoin(r1, none).size() == 0);
}

TEST_CASE("relational operations agree with the nested-loop oracle") {
    std::mt19937_64 rng(13);
    std::vector<std::string> vars{"A", "B", "C", "D", "E", "F"};
    for (int trial = 0; trial < 120; ++trial) {
        auto random_rel = [&]() {
            std::shuffle(vars.begin(), vars.end(), rng);
            size_t arity = 1 + rng() % 4;
            std::vector<std::string> scope(vars.begin(), vars.begin() + static_cast<long>(arity));
            Relation r = Relation::empty(scope);
            size_t rows = rng() % 30;
            for (size_t i = 0; i < rows; ++i) {
                std::vector<std::string> row;
                for (size_t c = 0; c < arity; ++c)
                    row.push_back(std::to_string(rng() % 3));
                r.add_row(row);
            }
            r.normalize();
            return r;
        };
        Relation r1 = random_rel();
        Relation r2 = random_rel();
        Relation fast = join(r1, r2);
        Relation slow = naive_join(r1, r2);
        CHECK(fast.scope == slow.scope);
        CHECK(fast.rows == slow.rows);

        // semijoin = projection of the join onto r1's scope
        Relation sj = semijoin(r1, r2);
        Relation sj_oracle = project(slow, VarSet(r1.scope.begin(), r1.scope.end()));
        Relation sj_sorted = project(sj, VarSet(r1.scope.begin(), r1.scope.end()));
        CHECK(sj_sorted.rows == sj_oracle.rows);

        // projection via the oracle definition
        VarSet w;
        for (const auto& v : r1.scope)
            if (rng() % 2)
                w.insert(v);
        if (w.empty())
            w.insert(r1.scope.front());
        Relation pr = project(r1, w);
        std::set<std::vector<Tok>> expect;
        for (const auto& row : r1.rows) {
            std::vector<Tok> picked;
            for (const auto& v : pr.scope)
                picked.push_back(row[static_cast<size_t>(r1.col(v))]);
            expect.insert(picked);
        }
        CHECK(std::set<std::vector<Tok>>(pr.rows.begin(), pr.rows.end()) == expect);
    }
}

TEST_CASE("contracting a subsumed edge keeps the join tree valid") {
    Hypergraph ha = hg({{"A", "B", "C"}, {"A", "B"}, {"B", "C"}, {"A", "C"}, {"C", "D"}});
    auto jt = is_acyclic(ha);
    REQUIRE(jt.has_value());
    // find an edge {v1,v2} with label(v1) subset of label(v2) and contract it
    for (auto [a, b] : jt->edges) {
        const auto& la = jt->labels[static_cast<size_t>(a)];
        const auto& lb = jt->labels[static_cast<size_t>(b)];
        if (std::includes(lb.begin(), lb.end(), la.begin(), la.end())) {
            JoinTree contracted = jt->contract_edge(b, a);
            Hypergraph remaining;
            remaining.nodes = ha.nodes;
            for (const auto& lab : contracted.labels)
                remaining.edges.insert(lab);
            CHECK(contracted.is_tree());
            CHECK(check_join_tree(contracted, remaining));
            return;
        }
    }
    FAIL("no contractible edge found");
}

TEST_CASE("nullary relations behave as join units") {
    Relation unit = Relation::unit();
    Relation r = make_rel({"A"}, {{"0"}, {"1"}});
    CHECK(join(unit, r).rows == r.rows);
    CHECK(join(r, unit).rows == r.rows);
    CHECK(project(r, {}).size() == 1);
    CHECK(project(make_rel({"A"}, {}), {}).size() == 0);
}
