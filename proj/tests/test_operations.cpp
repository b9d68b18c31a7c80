#include <gtest/gtest.h>

#include <set>

#include "csplift/audit.hpp"
#include "csplift/operations.hpp"
#include "support.hpp"

using namespace csplift;
using namespace csplift::boolean_ops;

namespace {

const Relation leq("le", 2, {{0, 0}, {0, 1}, {1, 1}});
const Relation eq2("eq", 2, {{0, 0}, {1, 1}});

FiniteOperation negation() { return FiniteOperation("not", 2, 1, {1, 0}); }

// Siggers identities checked from the raw table, independent of is_siggers_pair.
bool raw_siggers_pair(const std::vector<Element>& g, const std::vector<Element>& s, std::size_t d) {
    std::vector<bool> in_img(d, false);
    for (auto v : g) in_img[v] = true;
    auto at = [&](Element a, Element b, Element c, Element e) { return s[((a * d + b) * d + c) * d + e]; };
    for (Element x = 0; x < d; ++x) {
        if (!in_img[x]) continue;
        if (at(x, x, x, x) != x) return false;
        for (Element y = 0; y < d; ++y) {
            if (!in_img[y]) continue;
            for (Element z = 0; z < d; ++z) {
                if (!in_img[z]) continue;
                for (Element w = 0; w < d; ++w)
                    if (in_img[w] && !in_img[at(x, y, z, w)]) return false;
                if (at(x, y, x, z) != at(y, x, z, y)) return false;
            }
        }
    }
    return true;
}

} // namespace

TEST(Preserves, Examples) {
    EXPECT_TRUE(preserves_relation(min2(), leq));
    EXPECT_FALSE(preserves_relation(negation(), leq));
    for (std::size_t n = 1; n <= 3; ++n)
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_TRUE(preserves_relation(FiniteOperation::projection(2, n, i), leq));
            EXPECT_TRUE(preserves_relation(FiniteOperation::projection(2, n, i), eq2));
        }
}

TEST(Preserves, MatchesDefinitionOnRandomInputs) {
    std::mt19937_64 rng(1);
    for (int round = 0; round < 200; ++round) {
        auto f = audit::random_operation(rng, 2, 2);
        auto t = testsupport::random_structure(rng, "T", 2, {2}, 0.5);
        const auto& rows = t.relations[0].tuples();
        bool ok = true;
        for (const auto& a : rows)
            for (const auto& b : rows) ok = ok && t.relations[0].contains(std::vector<Element>{f({a[0], b[0]}), f({a[1], b[1]})});
        EXPECT_EQ(preserves_relation(f, t.relations[0]), ok);
    }
}

TEST(ComponentwisePreserves, Examples) {
    std::vector<FiniteOperation> ids{FiniteOperation::projection(2, 1, 0), FiniteOperation::projection(2, 1, 0)};
    EXPECT_TRUE(componentwise_preserves(ids, leq));
    std::vector<FiniteOperation> mm{min2(), min2()};
    EXPECT_TRUE(componentwise_preserves(mm, leq));
    std::vector<FiniteOperation> mx{min2(), max2()};
    EXPECT_FALSE(componentwise_preserves(mx, eq2));
    std::vector<FiniteOperation> one{min2()};
    EXPECT_THROW(componentwise_preserves(one, leq), SignatureError);
}

TEST(Siggers, Examples) {
    auto g0 = FiniteOperation::constant(2, 1, 0);
    auto s = FiniteOperation::from_function("s", 2, 4, [](auto x) { return x[0] | x[3]; });
    EXPECT_TRUE(is_siggers_pair(g0, s));
    auto id = FiniteOperation::projection(2, 1, 0);
    EXPECT_FALSE(is_siggers_pair(id, FiniteOperation::projection(2, 4, 0)));
}

TEST(Siggers, MajorityOfFirstThreeIsNotSiggers) {
    // s(x,y,x,z) = maj(x,y,x) = x while s(y,x,z,y) = maj(y,x,z); x=0, y=z=1 separates them.
    auto id = FiniteOperation::projection(2, 1, 0);
    auto s = FiniteOperation::from_function("maj3", 2, 4, [](auto x) { return (x[0] + x[1] + x[2]) >= 2 ? 1 : 0; });
    EXPECT_FALSE(is_siggers_pair(id, s));
    EXPECT_NE(s({0, 1, 0, 1}), s({1, 0, 1, 1}));
}

TEST(Siggers, KnownSiggersOperationsOnBooleanDomain) {
    auto id = FiniteOperation::projection(2, 1, 0);
    // Majority and minority both yield Siggers terms via s(x,y,z,w) = m(x,y,z) composed appropriately.
    auto from_maj = FiniteOperation::from_function("s", 2, 4, [](auto x) { return (x[1] + x[2] + x[3]) >= 2 ? 1 : 0; });
    EXPECT_TRUE(is_siggers_pair(id, from_maj));
    auto from_min = FiniteOperation::from_function("s", 2, 4, [](auto x) { return x[0] & x[1] & x[2] & x[3]; });
    EXPECT_TRUE(is_siggers_pair(id, from_min));
}

TEST(Census, SingletonDomain) { EXPECT_EQ(enumerate_siggers_pairs(1).size(), 1u); }

TEST(Census, BooleanCountsAgreeWithRawFilter) {
    std::uint64_t total = 0, constant_g = 0;
    std::vector<Element> g(2), s(16);
    for (unsigned gi = 0; gi < 4; ++gi) {
        g = {static_cast<Element>(gi >> 1), static_cast<Element>(gi & 1)};
        for (unsigned si = 0; si < (1u << 16); ++si) {
            for (unsigned k = 0; k < 16; ++k) s[k] = (si >> (15 - k)) & 1;
            if (raw_siggers_pair(g, s, 2)) {
                ++total;
                if (g[0] == g[1]) ++constant_g;
            }
        }
    }
    auto pairs = enumerate_siggers_pairs(2);
    EXPECT_EQ(pairs.size(), total);
    EXPECT_EQ(total, 66048u);
    EXPECT_EQ(constant_g, 2u * 32768u);
    std::uint64_t const0 = 0;
    for (const auto& p : pairs) const0 += p.g.table() == std::vector<Element>{0, 0};
    EXPECT_EQ(const0, 32768u);
    for (std::size_t i = 1; i < pairs.size(); i += 997) {
        EXPECT_TRUE(is_siggers_pair(pairs[i].g, pairs[i].s));
        EXPECT_TRUE(std::tie(pairs[i - 1].g, pairs[i - 1].s) < std::tie(pairs[i].g, pairs[i].s));
    }
}

TEST(Census, LargerDomainRefused) { EXPECT_THROW(enumerate_siggers_pairs(3), CapacityError); }

TEST(FindSiggersPair, ConstantPreservingTemplate) {
    RelationalStructure s{"zeros", 3, {Relation("r", 2, {{0, 0}, {1, 2}, {2, 1}})}};
    auto p = find_siggers_pair_admitted(s);
    ASSERT_TRUE(p);
    EXPECT_EQ(p->g.table(), (std::vector<Element>{0, 0, 0}));
    EXPECT_TRUE(is_siggers_pair(p->g, p->s));
    EXPECT_TRUE(is_polymorphism(p->s, s));
}

TEST(FindSiggersPair, LeqWithConstantsHasPair) {
    RelationalStructure s{"leq01", 2, {leq, Relation("zero", 1, {{0}}), Relation("one", 1, {{1}})}};
    auto p = find_siggers_pair_admitted(s);
    ASSERT_TRUE(p);
    EXPECT_TRUE(is_siggers_pair(p->g, p->s));
    EXPECT_TRUE(is_polymorphism(p->g, s));
    EXPECT_TRUE(is_polymorphism(p->s, s));
}

TEST(FindSiggersPair, K2AdmitsPairK3DoesNot) {
    auto k2 = testsupport::k(2);
    auto p = find_siggers_pair_admitted(k2);
    ASSERT_TRUE(p);
    EXPECT_TRUE(is_siggers_pair(p->g, p->s));
    EXPECT_TRUE(is_polymorphism(p->s, k2));
}

TEST(FindSiggersPair, AgreesWithCensusOnBooleanTemplates) {
    auto pairs = enumerate_siggers_pairs(2);
    std::mt19937_64 rng(4);
    for (int round = 0; round < 12; ++round) {
        auto t = testsupport::random_structure(rng, "T", 2, {2, 1}, 0.5);
        bool brute = false;
        for (const auto& p : pairs)
            if (is_polymorphism(p.g, t) && is_polymorphism(p.s, t)) {
                brute = true;
                break;
            }
        EXPECT_EQ(find_siggers_pair_admitted(t).has_value(), brute);
    }
}

TEST(CloneClosure, EmptyGeneratorsGiveProjections) {
    auto layers = clone_closure_by_arity({}, 2, 3);
    for (std::size_t n = 1; n <= 3; ++n) {
        ASSERT_EQ(layers[n].size(), n);
        for (const auto& f : layers[n]) EXPECT_TRUE(audit::is_projection(f));
    }
}

TEST(CloneClosure, MinGeneratesMinAndProjections) {
    std::vector<FiniteOperation> gens{min2()};
    auto layers = clone_closure_by_arity(gens, 2, 2);
    std::set<std::vector<Element>> tables;
    for (const auto& f : layers[2]) tables.insert(f.table());
    EXPECT_EQ(tables, (std::set<std::vector<Element>>{{0, 0, 1, 1}, {0, 1, 0, 1}, {0, 0, 0, 1}}));
}

TEST(CloneClosure, NandIsComplete) {
    std::vector<FiniteOperation> gens{nand2()};
    auto layers = clone_closure_by_arity(gens, 2, 3);
    EXPECT_EQ(layers[3].size(), 256u);
    EXPECT_EQ(layers[2].size(), 16u);
}

TEST(CloneClosure, ClosedUnderComposition) {
    std::vector<FiniteOperation> gens{majority3()};
    auto layers = clone_closure_by_arity(gens, 2, 3);
    std::set<std::vector<Element>> ternary;
    for (const auto& f : layers[3]) ternary.insert(f.table());
    for (const auto& f : layers[3])
        for (const auto& a : layers[3])
            for (const auto& b : layers[3])
                for (const auto& cc : layers[3]) {
                    auto h = FiniteOperation::from_function("h", 2, 3, [&](auto x) {
                        return f({a(x), b(x), cc(x)});
                    });
                    ASSERT_TRUE(ternary.count(h.table()));
                }
}

TEST(BooleanOracle, Examples) {
    std::vector<FiniteOperation> mn{min2()}, none{}, nd{nand2()};
    EXPECT_TRUE(boolean_algebra_tractable(mn));
    EXPECT_FALSE(boolean_algebra_tractable(none));
    EXPECT_TRUE(boolean_algebra_tractable(nd));
    std::vector<FiniteOperation> proj{FiniteOperation::projection(2, 2, 1)};
    EXPECT_FALSE(boolean_algebra_tractable(proj));
}

TEST(BooleanOracle, TwelveTractableBinaryOperations) {
    std::size_t count = 0;
    for (unsigned t = 0; t < 16; ++t) {
        FiniteOperation f("b", 2, 2, {static_cast<Element>(t >> 3 & 1), static_cast<Element>(t >> 2 & 1), static_cast<Element>(t >> 1 & 1),
                                      static_cast<Element>(t & 1)});
        std::vector<FiniteOperation> one{f};
        count += boolean_algebra_tractable(one);
    }
    // Of the 16 binary tables only the two projections and the two negated projections fail.
    EXPECT_EQ(count, 12u);
}
