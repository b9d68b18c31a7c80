#include <gtest/gtest.h>

#include "csplift/audit.hpp"
#include "csplift/conservative.hpp"
#include "csplift/lifted.hpp"
#include "support.hpp"

using namespace csplift;
using testsupport::c;
using testsupport::k;

TEST(Lift, BetweennessOverOneTriple) {
    RelationalStructure r{"R", 3, {Relation("zero", 1, {}), Relation("one", 1, {}), Relation("btw", 3, {{0, 1, 2}})}};
    auto l = lift_language(betweenness_template(), r);
    EXPECT_EQ(l.structure.domain_size, 6u);
    ASSERT_EQ(l.structure.relations.size(), 1u + 3u);
    EXPECT_EQ(l.structure.relations[0].arity(), 3u);
    EXPECT_EQ(l.structure.relations[0].size(), 6u);
    for (std::size_t v = 0; v < 3; ++v) EXPECT_EQ(l.structure.relations[l.dom_relation(static_cast<Element>(v))].size(), 2u);
    for (const auto& t : l.structure.relations[0].tuples())
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(l.block_of(t[j]), j);
}

TEST(Lift, SingleEdgeCanonicalInstance) {
    RelationalStructure r{"edge", 2, {Relation("e", 2, {{0, 1}})}};
    auto ci = canonical_instance(r);
    EXPECT_EQ(ci.domain_size, 2u);
    ASSERT_EQ(ci.relations.size(), 3u);
    EXPECT_EQ(ci.relations[0].tuples(), (std::vector<Tuple>{{0, 1}}));
    EXPECT_EQ(ci.relations[1].tuples(), (std::vector<Tuple>{{0}}));
}

TEST(Lift, CanonicalCorrespondenceCounts) {
    for (std::size_t n : {3u, 4u, 5u, 6u}) {
        auto r = c(n);
        for (const auto& gamma : {k(2), k(3)}) {
            auto l = lift_language(gamma, r);
            auto ci = canonical_instance(r);
            EXPECT_EQ(count_homomorphisms(ci, l.structure), count_homomorphisms(r, gamma)) << n << " " << gamma.name;
            for_each_homomorphism(ci, l.structure, [&](const Map& h) {
                Map base(n);
                for (std::size_t v = 0; v < n; ++v) {
                    EXPECT_EQ(l.block_of(h[v]), v);
                    base[v] = l.local_of(h[v]);
                }
                EXPECT_TRUE(is_homomorphism(r, gamma, base));
                return true;
            });
        }
    }
}

TEST(Lift, EmptyRelationsLeaveOnlyDomainConstraints) {
    RelationalStructure r{"R", 3, {Relation("e", 2, {})}};
    auto ci = canonical_instance(r);
    auto l = lift_language(k(2), r);
    EXPECT_EQ(count_homomorphisms(ci, l.structure), 8u);
}

TEST(Lift, ValuedLift) {
    auto g = independent_set_template();
    RelationalStructure r{"R", 2, {Relation("f", 2, {{0, 1}}), Relation("u00", 1, {}), Relation("u01", 1, {}),
                                   Relation("u10", 1, {}), Relation("u11", 1, {})}};
    auto l = lift_language(g, r);
    const auto& f = l.lifted.functions[0];
    EXPECT_TRUE(f({1, 3}).is_infinite());  // d(0,1), d(1,1)
    EXPECT_EQ(f({0, 2}), CostValue(0));
    EXPECT_TRUE(f({2, 0}).is_infinite());  // wrong blocks
    EXPECT_TRUE(f({0, 1}).is_infinite());
    const auto& dom1 = l.lifted.functions[2];  // Dom@1
    EXPECT_EQ(dom1({2}), CostValue(0));
    EXPECT_TRUE(dom1({0}).is_infinite());
}

TEST(MultiSorted, InterpretCanonicalIsConsistent) {
    auto r = c(4);
    auto l = lift_language(k(2), r);
    auto v = interpret_as_multisorted(canonical_instance(r), l);
    ASSERT_TRUE(std::holds_alternative<MultiSortedView>(v));
    const auto& view = std::get<MultiSortedView>(v);
    EXPECT_TRUE(view.certified);
    for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(view.instance.delta[x], x);
}

TEST(MultiSorted, ConflictingSlots) {
    auto r = k(2);  // tuples (0,1) and (1,0)
    auto l = lift_language(k(2), r);
    RelationalStructure inst{"I", 2, {}};
    for (std::size_t j = 0; j < l.info.size(); ++j) {
        std::vector<Tuple> ts;
        if (l.info[j].base == 0) ts.push_back({0, 1});
        inst.relations.emplace_back(l.structure.relations[j].name(), l.structure.relations[j].arity(), ts);
    }
    auto v = interpret_as_multisorted(inst, l);
    ASSERT_TRUE(std::holds_alternative<SortConflict>(v));
    EXPECT_EQ(std::get<SortConflict>(v).variable, 0u);
}

TEST(MultiSorted, RandomInstancesAreCertified) {
    std::mt19937_64 rng(12);
    auto r = c(3);
    auto l = lift_language(k(3), r);
    int consistent = 0;
    for (int round = 0; round < 20; ++round) {
        // Each variable w gets one sort; tuples are drawn only from scopes matching it, so no conflicts arise.
        std::size_t w = 2 + rng() % 5;
        std::vector<Element> sort(w);
        for (auto& s : sort) s = static_cast<Element>(rng() % 3);
        RelationalStructure inst{"I", w, {}};
        for (std::size_t j = 0; j < l.info.size(); ++j) {
            std::vector<Tuple> ts;
            const auto& scope = l.info[j].scope;
            for (int tries = 0; tries < 3; ++tries) {
                Tuple t;
                for (auto v : scope) {
                    std::vector<Element> cand;
                    for (Element x = 0; x < w; ++x)
                        if (sort[x] == v) cand.push_back(x);
                    if (cand.empty()) break;
                    t.push_back(cand[rng() % cand.size()]);
                }
                if (t.size() == scope.size()) ts.push_back(t);
            }
            inst.relations.emplace_back(l.structure.relations[j].name(), scope.size(), ts);
        }
        auto v = interpret_as_multisorted(inst, l);
        ASSERT_TRUE(std::holds_alternative<MultiSortedView>(v));
        const auto& view = std::get<MultiSortedView>(v);
        EXPECT_TRUE(view.certified);
        ++consistent;
        auto ms = solve_multisorted(view.instance, view.sort_sizes);
        EXPECT_EQ(ms.has_value(), find_homomorphism(inst, l.structure).has_value());
    }
    EXPECT_EQ(consistent, 20);
}

TEST(MultiSorted, SolveExamples) {
    MultiSortedInstance one;
    one.variable_count = 1;
    one.delta = {0};
    one.relations.push_back({"u", {0}, {{1}}});
    one.constraints.push_back({{0}, 0});
    std::vector<std::size_t> sizes{2};
    auto h = solve_multisorted(one, sizes);
    ASSERT_TRUE(h);
    EXPECT_EQ((*h)[0], 1u);

    MultiSortedInstance two;
    two.variable_count = 2;
    two.delta = {0, 1};
    two.relations.push_back({"eq", {0, 1}, {}});
    two.constraints.push_back({{0, 1}, 0});
    std::vector<std::size_t> sizes2{2, 3};
    EXPECT_FALSE(solve_multisorted(two, sizes2));
}

TEST(MultiSorted, SingleSortMatchesSingleSortedSearch) {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 20; ++round) {
        auto t = testsupport::random_structure(rng, "T", 3, {2}, 0.45);
        auto r = testsupport::random_structure(rng, "R", 2 + rng() % 4, {2}, 0.3);
        MultiSortedInstance inst;
        inst.variable_count = r.domain_size;
        inst.delta.assign(r.domain_size, 0);
        inst.relations.push_back({"e", {0, 0}, t.relations[0].tuples()});
        for (const auto& tup : r.relations[0].tuples()) inst.constraints.push_back({tup, 0});
        std::vector<std::size_t> sizes{3};
        auto ms = solve_multisorted(inst, sizes);
        EXPECT_EQ(ms.has_value(), find_homomorphism(r, t).has_value());
        if (ms) { EXPECT_TRUE(is_homomorphism(r, t, *ms)); }
    }
}

TEST(MultiSorted, PolymorphismCheck) {
    auto l = lift_language(audit::leq_template(), RelationalStructure{"R", 2, {Relation("e", 2, {{0, 1}, {1, 0}})}});
    auto rho = multisorted_view(l, 0);
    std::vector<FiniteOperation> ids{FiniteOperation::projection(2, 1, 0), FiniteOperation::projection(2, 1, 0)};
    EXPECT_TRUE(multisorted_polymorphism_check(ids, rho));
    std::vector<FiniteOperation> mins{boolean_ops::min2(), boolean_ops::min2()};
    EXPECT_TRUE(multisorted_polymorphism_check(mins, rho));
    // min on the first sort, max on the second keeps <= ; max then min breaks it.
    std::vector<FiniteOperation> minmax{boolean_ops::min2(), boolean_ops::max2()};
    EXPECT_TRUE(multisorted_polymorphism_check(minmax, rho));
    std::vector<FiniteOperation> maxmin{boolean_ops::max2(), boolean_ops::min2()};
    EXPECT_FALSE(multisorted_polymorphism_check(maxmin, rho));
    std::vector<FiniteOperation> neg{FiniteOperation("not", 2, 1, {1, 0}), FiniteOperation::projection(2, 1, 0)};
    EXPECT_FALSE(multisorted_polymorphism_check(neg, rho));
}
