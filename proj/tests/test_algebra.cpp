#include <gtest/gtest.h>

#include "csplift/algebra.hpp"
#include "csplift/audit.hpp"
#include "support.hpp"

using namespace csplift;
using namespace csplift::boolean_ops;

namespace {

const std::vector<std::size_t> sig2{2};

Algebra binary(const std::string& name, FiniteOperation f) { return Algebra{name, sig2, 2, {std::move(f)}}; }

AlgebraSet constants_only() {
    AlgebraSet b(sig2, 2);
    b.add(constant_algebra(0, sig2, 2));
    b.add(constant_algebra(1, sig2, 2));
    return b;
}

AlgebraSet commutative_algebras() {
    return all_algebras(sig2, 2, [](const Algebra& a) { return a.ops[0]({0, 1}) == a.ops[0]({1, 0}); });
}

bool naive_rho_b(const Relation& rho, const std::vector<Algebra>& as) {
    const auto m = rho.arity();
    for (const auto& x : rho.tuples())
        for (const auto& y : rho.tuples()) {
            Tuple z(m);
            for (std::size_t j = 0; j < m; ++j) z[j] = as[j].ops[0]({x[j], y[j]});
            if (!rho.contains(z)) return false;
        }
    return true;
}

} // namespace

TEST(ConstantAlgebra, Examples) {
    auto a = constant_algebra(0, sig2, 2);
    EXPECT_EQ(a.ops[0].table(), (std::vector<Element>{0, 0, 0, 0}));
    EXPECT_TRUE(is_extending(constants_only()));
    AlgebraSet half(sig2, 2);
    half.add(constant_algebra(0, sig2, 2));
    EXPECT_FALSE(is_extending(half));
}

TEST(AlgebraSet, RejectsDuplicatesAndMismatch) {
    auto b = constants_only();
    EXPECT_FALSE(b.add(constant_algebra(0, sig2, 2)));
    EXPECT_EQ(b.size(), 2u);
    EXPECT_THROW(b.add(constant_algebra(0, {3}, 2)), SignatureError);
}

TEST(RhoB, Examples) {
    const auto btw = betweenness_template().relations[2];
    std::vector<Algebra> consts(3, constant_algebra(0, sig2, 2));
    EXPECT_TRUE(rho_B_membership(btw, consts));
    Relation le("le", 2, {{0, 0}, {0, 1}, {1, 1}});
    std::vector<Algebra> nand(2, binary("nand", nand2()));
    EXPECT_FALSE(rho_B_membership(le, nand));
}

TEST(RhoB, AgreesWithNaiveOnBetweenness) {
    const auto btw = betweenness_template().relations[2];
    auto all = all_algebras(sig2, 2, [](const Algebra&) { return true; });
    ASSERT_EQ(all.size(), 16u);
    for (std::size_t a = 0; a < 16; ++a)
        for (std::size_t b = 0; b < 16; ++b)
            for (std::size_t c = 0; c < 16; ++c) {
                std::vector<Algebra> as{all[a], all[b], all[c]};
                ASSERT_EQ(rho_B_membership(btw, as), naive_rho_b(btw, as));
            }
}

TEST(GammaB, ConstantsOverK2) {
    auto gb = build_gamma_B(testsupport::k(2), constants_only());
    EXPECT_EQ(gb.domain_size, 2u);
    EXPECT_EQ(gb.relations[0].tuples(), (std::vector<Tuple>{{0, 1}, {1, 0}}));
}

TEST(GammaB, FullAndEmptyRelations) {
    RelationalStructure g{"g", 2, {Relation("full", 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}), Relation("none", 2, {})}};
    auto b = audit::small_extending_set(2);
    auto gb = build_gamma_B(g, b);
    EXPECT_EQ(gb.relations[0].size(), b.size() * b.size());
    EXPECT_EQ(gb.relations[1].size(), b.size() * b.size());
}

TEST(ExtendingEmbedding, Examples) {
    auto b = audit::small_extending_set(2);
    for (const auto& g : {betweenness_template(), testsupport::k(2), audit::leq_template()}) {
        auto e = extending_embedding(g, b);
        EXPECT_TRUE(is_homomorphism(g, build_gamma_B(g, b), e)) << g.name;
    }
    AlgebraSet half(sig2, 2);
    half.add(constant_algebra(0, sig2, 2));
    EXPECT_THROW(extending_embedding(testsupport::k(2), half), PreconditionError);
}

TEST(TractableSet, Examples) {
    auto oracle = boolean_schaefer_oracle();
    auto good = audit::boolean_tractable_binary_algebras();
    EXPECT_EQ(good.size(), 12u);
    EXPECT_EQ(is_tractable_set(good, oracle).overall, Verdict::tractable);
    auto with_proj = audit::small_extending_set(2);
    auto v = is_tractable_set(with_proj, oracle);
    EXPECT_EQ(v.overall, Verdict::unknown);
    EXPECT_EQ(v.members[*with_proj.index_of(binary("p", FiniteOperation::projection(2, 2, 0)))], Verdict::unknown);
    Algebra nullary{"c", {0}, 2, {FiniteOperation("c", 2, 0, {1})}};
    EXPECT_EQ(oracle(nullary), Verdict::unknown);
}

TEST(TractableSet, ProductOfConstants) {
    auto p = product_algebra(constants_only());
    EXPECT_EQ(p.domain_size, 4u);
    // (0,1) ranked with the first algebra most significant is 1.
    for (auto v : p.ops[0].table()) EXPECT_EQ(v, 1u);
}

TEST(Outside, Projections) {
    audit::Rng arng(1);
    for (int round = 0; round < 20; ++round) {
        std::vector<Algebra> as;
        for (int i = 0; i < 3; ++i) as.push_back(audit::random_algebra(arng, {2, 1}, 2));
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(outside_apply(FiniteOperation::projection(2, 3, j), as), as[j]);
    }
}

TEST(Outside, IdempotentOnEqualInputs) {
    audit::Rng rng(3);
    auto a = audit::random_algebra(rng, sig2, 2);
    std::vector<Algebra> same(3, a);
    EXPECT_EQ(outside_apply(majority3(), same), a);
    std::vector<Algebra> two(2, a);
    EXPECT_EQ(outside_apply(min2(), two), a);
}

TEST(Outside, IdentityDefinedSetsArePreservedByEverything) {
    auto comm = commutative_algebras();
    EXPECT_EQ(comm.size(), 8u);
    auto idem = all_algebras(sig2, 2, [](const Algebra& a) { return a.ops[0]({0, 0}) == 0 && a.ops[0]({1, 1}) == 1; });
    audit::Rng rng(8);
    for (std::size_t n = 1; n <= 3; ++n)
        for (int round = 0; round < 20; ++round) {
            auto f = audit::random_operation(rng, 2, n);
            EXPECT_TRUE(outside_preserves(f, comm));
        }
    for (int round = 0; round < 20; ++round) {
        auto f = audit::random_operation(rng, 2, 2);
        bool idempotent = f({0, 0}) == 0 && f({1, 1}) == 1;
        if (idempotent) { EXPECT_TRUE(outside_preserves(f, idem)); }
    }
}

TEST(Inside, ProjectionsActAsIdentity) {
    audit::Rng rng(4);
    OperationSystem ids{{2, 1}, {{FiniteOperation::projection(2, 2, 0), FiniteOperation::projection(2, 2, 1)},
                                 {FiniteOperation::projection(2, 1, 0)}}};
    for (int round = 0; round < 10; ++round) {
        auto a = audit::random_algebra(rng, {2, 1}, 2);
        EXPECT_EQ(inside_apply(ids, a), a);
    }
}

TEST(Inside, SwappedProjectionsPermuteArguments) {
    OperationSystem swap{{2}, {{FiniteOperation::projection(2, 2, 1), FiniteOperation::projection(2, 2, 0)}}};
    auto a = binary("imp", FiniteOperation("imp", 2, 2, {1, 1, 0, 1}));
    auto out = inside_apply(swap, a);
    for (Element x = 0; x < 2; ++x)
        for (Element y = 0; y < 2; ++y) EXPECT_EQ(out.ops[0]({x, y}), a.ops[0]({y, x}));
}

TEST(Inside, MatchesHandEvaluator) {
    audit::Rng rng(5);
    for (int round = 0; round < 50; ++round) {
        auto a = audit::random_algebra(rng, sig2, 2);
        auto f1 = audit::random_operation(rng, 2, 2), f2 = audit::random_operation(rng, 2, 2);
        OperationSystem fb{{2}, {{f1, f2}}};
        auto out = inside_apply(fb, a);
        const auto& t = a.ops[0].table();
        for (Element x = 0; x < 2; ++x)
            for (Element y = 0; y < 2; ++y) {
                Element u = f1.table()[x * 2 + y], v = f2.table()[x * 2 + y];
                EXPECT_EQ(out.ops[0].table()[x * 2 + y], t[u * 2 + v]);
            }
    }
}

TEST(VerifyLifted, ProjectionAndMin) {
    auto leq = audit::leq_template();
    auto comm = commutative_algebras();
    auto p = verify_outside_polymorphism(FiniteOperation::projection(2, 2, 0), leq, comm);
    EXPECT_EQ(p.status, AuditStatus::passed);
    auto m = verify_outside_polymorphism(min2(), leq, comm);
    EXPECT_EQ(m.status, AuditStatus::passed);
    auto skip = verify_outside_polymorphism(FiniteOperation("not", 2, 1, {1, 0}), leq, comm);
    EXPECT_EQ(skip.status, AuditStatus::skipped);
}

TEST(Transport, TrivialCases) {
    audit::Rng rng(6);
    auto f = audit::random_operation(rng, 2, 3);
    std::vector<Algebra> as;
    for (int i = 0; i < 3; ++i) as.push_back(audit::random_algebra(rng, sig2, 2));
    EXPECT_TRUE(term_transport_check(transport::Permutation{f, f, {0, 1, 2}}, as));
    auto p0 = FiniteOperation::projection(2, 3, 0);
    std::vector<FiniteOperation> parts{p0, FiniteOperation::projection(2, 3, 1)};
    EXPECT_TRUE(term_transport_check(transport::Superposition{p0, FiniteOperation::projection(2, 2, 0), parts}, as));
    EXPECT_TRUE(term_transport_check(transport::Projection{3, 2, 2}, as));
}

TEST(Transport, FalseBaseIdentityIsAPreconditionError) {
    std::vector<Algebra> as(2, constant_algebra(0, sig2, 2));
    EXPECT_THROW(term_transport_check(transport::Fictitious{min2(), FiniteOperation("not", 2, 1, {1, 0})}, as), PreconditionError);
}

TEST(Transport, AuditSmallSeed) {
    auto r = audit::transport_audit(1, 20);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.cases, 100u);
}

TEST(Transport, IdentityTermsTransport) {
    // min is commutative and associative; both identities survive the lift.
    std::vector<FiniteOperation> ops{min2()};
    auto comm_l = Term::apply(0, {Term::x(0), Term::x(1)}), comm_r = Term::apply(0, {Term::x(1), Term::x(0)});
    ASSERT_TRUE(identity_holds(ops, comm_l, comm_r, 2, 2));
    auto pool = audit::small_extending_set(2).members();
    EXPECT_TRUE(identity_transports(ops, comm_l, comm_r, 2, pool));
    auto assoc_l = Term::apply(0, {Term::apply(0, {Term::x(0), Term::x(1)}), Term::x(2)});
    auto assoc_r = Term::apply(0, {Term::x(0), Term::apply(0, {Term::x(1), Term::x(2)})});
    ASSERT_TRUE(identity_holds(ops, assoc_l, assoc_r, 3, 2));
    EXPECT_TRUE(identity_transports(ops, assoc_l, assoc_r, 3, pool));
}

TEST(SiggersTransport, Examples) {
    auto leq = audit::leq_template();
    auto consts = constants_only();
    auto c0 = siggers_transport(leq, constant_pair(2, 0), consts);
    ASSERT_TRUE(c0.witness);
    EXPECT_TRUE(c0.confirmed);
    EXPECT_EQ(c0.witness->g.table(), (std::vector<Element>{0, 0}));

    auto comm = commutative_algebras();
    auto pair = find_siggers_pair_admitted(leq);
    ASSERT_TRUE(pair);
    auto w = siggers_transport(leq, *pair, comm);
    ASSERT_TRUE(w.witness);
    EXPECT_TRUE(w.confirmed);

    AlgebraSet missing(sig2, 2);
    for (const auto& a : comm.members())
        if (!(a == constant_algebra(0, sig2, 2))) missing.add(a);
    auto none = siggers_transport(leq, constant_pair(2, 0), missing);
    EXPECT_FALSE(none.witness);
}

TEST(MInv, Examples) {
    EXPECT_TRUE(lifted_in_minv_check(testsupport::k(2), constants_only()).passed);
    RelationalStructure full{"full", 2, {Relation("r", 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}})}};
    EXPECT_TRUE(lifted_in_minv_check(full, audit::small_extending_set(2)).passed);
    EXPECT_TRUE(audit::minv_audit(3, 10).ok());
}

TEST(Pipeline, K2Member) {
    auto k2 = testsupport::k(2);
    auto b = audit::boolean_tractable_binary_algebras();
    auto res = reduction_pipeline(k2, b, testsupport::c(4));
    EXPECT_TRUE(res.member);
    EXPECT_TRUE(res.agrees_with_direct);
    EXPECT_EQ(res.tractability.overall, Verdict::tractable);
    ASSERT_TRUE(res.assignment);
    EXPECT_TRUE(is_homomorphism(testsupport::c(4), k2, *res.assignment));
}

TEST(Pipeline, NotMemberAtStepOne) {
    auto k2 = testsupport::k(2);
    // A loop needs an algebra whose operation is self-dual, and none of the twelve is.
    RelationalStructure loop{"loop", 1, {Relation("e", 2, {{0, 0}})}};
    auto res = reduction_pipeline(k2, audit::boolean_tractable_binary_algebras(), loop);
    EXPECT_FALSE(res.member);
    EXPECT_EQ(res.decided_at_step, 1);
    EXPECT_TRUE(res.agrees_with_direct);
}

TEST(Pipeline, RejectsNonExtendingSet) {
    AlgebraSet half(sig2, 2);
    half.add(constant_algebra(0, sig2, 2));
    EXPECT_THROW(reduction_pipeline(testsupport::k(2), half, testsupport::c(4)), PreconditionError);
}
