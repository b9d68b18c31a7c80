#include <gtest/gtest.h>

#include "csplift/audit.hpp"
#include "csplift/relational.hpp"
#include "csplift/siggers.hpp"
#include "csplift/solver.hpp"
#include "support.hpp"

using namespace csplift;
using namespace testsupport;

TEST(Validate, WellFormedK2) { EXPECT_TRUE(validate_structure(k(2)).empty()); }

TEST(Validate, OutOfRangeEntry) {
    RelationalStructure s{"bad", 2, {Relation("e", 2, {{0, 2}})}};
    auto v = validate_structure(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].message, "entry 2 out of range");
}

TEST(Validate, WrongTupleLength) {
    RelationalStructure s{"bad", 2, {Relation("r", 3, {{0, 1}})}};
    EXPECT_EQ(validate_structure(s).size(), 1u);
}

TEST(IsHomomorphism, Examples) {
    Map id{0, 1};
    EXPECT_TRUE(is_homomorphism(k(2), k(2), id));
    Map collapse{0, 0};
    EXPECT_FALSE(is_homomorphism(k(2), k(2), collapse));
    Map id3{0, 1, 2};
    EXPECT_TRUE(is_homomorphism(c(3), k(3), id3));
}

TEST(IsHomomorphism, SignatureMismatchThrows) {
    RelationalStructure u{"u", 2, {Relation("p", 1, {{0}})}};
    Map m{0, 1};
    EXPECT_THROW(is_homomorphism(k(2), u, m), SignatureError);
}

TEST(FindHomomorphism, Examples) {
    auto h = find_homomorphism(c(3), k(3));
    ASSERT_TRUE(h);
    EXPECT_TRUE(is_homomorphism(c(3), k(3), *h));
    EXPECT_FALSE(find_homomorphism(c(3), k(2)));
    auto btw = betweenness_template();
    auto id = find_homomorphism(btw, btw);
    ASSERT_TRUE(id);
    EXPECT_TRUE(is_homomorphism(btw, btw, *id));
}

TEST(FindHomomorphism, ReturnsLexFirstWitness) {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 60; ++round) {
        auto r = random_structure(rng, "R", 1 + rng() % 5, {2, 1}, 0.25);
        auto t = random_structure(rng, "T", 1 + rng() % 3, {2, 1}, 0.6);
        auto all = all_homs(r, t);
        auto h = find_homomorphism(r, t);
        ASSERT_EQ(h.has_value(), !all.empty());
        if (h) { EXPECT_EQ(*h, all.front()); }
        EXPECT_EQ(count_homomorphisms(r, t), all.size());
    }
}

TEST(FindHomomorphism, AgreesWithOdometerOnTernaryRelations) {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 80; ++round) {
        auto r = random_structure(rng, "R", 1 + rng() % 6, {3, 2}, 0.04);
        auto t = random_structure(rng, "T", 2 + rng() % 2, {3, 2}, 0.45);
        EXPECT_EQ(find_homomorphism(r, t).has_value(), !all_homs(r, t).empty());
    }
}

TEST(FindHomomorphism, SmallestDomainOrderFindsSameVerdict) {
    std::mt19937_64 rng(5);
    SearchOptions o;
    o.order = VarOrder::smallest_domain;
    for (int round = 0; round < 40; ++round) {
        auto r = random_structure(rng, "R", 1 + rng() % 6, {2}, 0.2);
        auto t = random_structure(rng, "T", 1 + rng() % 3, {2}, 0.5);
        auto h = find_homomorphism(r, t, o);
        EXPECT_EQ(h.has_value(), find_homomorphism(r, t).has_value());
        if (h) { EXPECT_TRUE(is_homomorphism(r, t, *h)); }
    }
}

TEST(FindHomomorphism, LazyTemplateMatchesMaterialized) {
    auto k3 = k(3);
    RelationalStructure lazy{"K3lazy", 3, {Relation::lazy("e", 2, 3, [](std::span<const Element> x) { return x[0] != x[1]; })}};
    for (std::size_t n = 3; n <= 6; ++n) {
        auto g = c(n);
        EXPECT_EQ(find_homomorphism(g, lazy).has_value(), find_homomorphism(g, k3).has_value());
    }
    EXPECT_FALSE(find_homomorphism(k(4), lazy));
}

TEST(FindHomomorphism, NodeCapRaisesCapacityError) {
    SearchOptions o;
    o.max_nodes = 5;
    o.decompose = false;
    EXPECT_THROW(find_homomorphism(k(6), k(5), o), CapacityError);
}

TEST(FindHomomorphism, EmptySourceAndTarget) {
    RelationalStructure empty{"E", 0, {Relation("e", 2, {})}};
    EXPECT_TRUE(find_homomorphism(empty, k(2)));
    RelationalStructure empty_t{"E", 0, {Relation("e", 2, {})}};
    EXPECT_FALSE(find_homomorphism(k(2), empty_t));
}

TEST(Order, UpperThanAndEquivalence) {
    EXPECT_TRUE(upper_than(c(4), k(2)));
    EXPECT_FALSE(upper_than(c(3), k(2)));
    EXPECT_TRUE(hom_equivalent(k(2), c(4)));
}

TEST(Order, UpperThanIsTransitive) {
    std::mt19937_64 rng(3);
    std::vector<RelationalStructure> pool;
    for (int i = 0; i < 10; ++i) pool.push_back(random_structure(rng, "S" + std::to_string(i), 1 + rng() % 4, {2}, 0.35));
    for (const auto& a : pool)
        for (const auto& b : pool)
            for (const auto& cc : pool)
                if (upper_than(a, b) && upper_than(b, cc)) { EXPECT_TRUE(upper_than(a, cc)); }
    for (const auto& a : pool) EXPECT_TRUE(upper_than(a, a));
}

TEST(UpMembership, Examples) {
    std::vector<RelationalStructure> l{k(2)};
    EXPECT_TRUE(up_membership(k(2), l));
    EXPECT_FALSE(up_membership(c(3), l));
    EXPECT_FALSE(up_membership(c(3), std::span<const RelationalStructure>{}));
}

TEST(UpMembership, MonotoneInList) {
    std::mt19937_64 rng(9);
    for (int round = 0; round < 30; ++round) {
        auto r = random_structure(rng, "R", 1 + rng() % 5, {2}, 0.3);
        std::vector<RelationalStructure> l;
        bool before = false;
        for (int i = 0; i < 4; ++i) {
            l.push_back(random_structure(rng, "L", 1 + rng() % 3, {2}, 0.5));
            bool now = up_membership(r, l);
            if (before) { EXPECT_TRUE(now); }
            before = now;
        }
    }
}

TEST(Power, SquareOfK2) {
    auto p = power_structure(k(2), 2);
    EXPECT_EQ(p.domain_size, 4u);
    EXPECT_EQ(p.relations[0].size(), 4u);
    EXPECT_TRUE(validate_structure(p).empty());
    // Components are rank-ordered pairs: (a,b) -> 2a+b.
    EXPECT_TRUE(p.relations[0].contains(std::vector<Element>{0, 3}));
    EXPECT_TRUE(p.relations[0].contains(std::vector<Element>{1, 2}));
}

TEST(Power, EmptyRelationsStayEmpty) {
    RelationalStructure s{"s", 3, {Relation("e", 2, {})}};
    EXPECT_EQ(power_structure(s, 3).relations[0].size(), 0u);
}

TEST(Power, CapacityLimit) {
    EXPECT_THROW(power_structure(k(10), 7), CapacityError);
    EXPECT_THROW(power_structure(k(2), 0), PreconditionError);
}

TEST(Power, ProjectionsAreHomomorphisms) {
    std::mt19937_64 rng(2);
    for (int round = 0; round < 10; ++round) {
        auto t = random_structure(rng, "T", 2 + rng() % 2, {2, 1}, 0.5);
        auto p = power_structure(t, 2);
        Map p0(p.domain_size), p1(p.domain_size);
        for (Element x = 0; x < p.domain_size; ++x) {
            p0[x] = static_cast<Element>(x / t.domain_size);
            p1[x] = static_cast<Element>(x % t.domain_size);
        }
        EXPECT_TRUE(is_homomorphism(p, t, p0));
        EXPECT_TRUE(is_homomorphism(p, t, p1));
    }
}

TEST(Union, TwoCopiesOfK2) {
    std::vector<RelationalStructure> parts{k(2), k(2)};
    auto u = disjoint_union(parts);
    EXPECT_EQ(u.domain_size, 4u);
    EXPECT_EQ(u.relations[0].size(), 4u);
    EXPECT_TRUE(u.relations[0].contains(std::vector<Element>{2, 3}));
    EXPECT_FALSE(u.relations[0].contains(std::vector<Element>{1, 2}));
    EXPECT_EQ(disjoint_union(std::span<const RelationalStructure>{}).domain_size, 0u);
}

TEST(Union, MapsIntoTargetIffEveryPartDoes) {
    std::vector<RelationalStructure> a{c(4), c(6)}, b{c(4), c(5)};
    EXPECT_TRUE(upper_than(disjoint_union(a), k(2)));
    EXPECT_FALSE(upper_than(disjoint_union(b), k(2)));
}
