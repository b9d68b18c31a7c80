#pragma once

#include <chrono>
#include <random>

#include "algebra.hpp"
#include "conservative.hpp"
#include "report.hpp"
#include "siggers.hpp"

namespace csplift::audit {

// All randomized audits draw from mt19937_64; pick() reduces modulo n so that
// sequences are identical across standard libraries.
using Rng = std::mt19937_64;

inline std::size_t pick(Rng& r, std::size_t n) { return n ? static_cast<std::size_t>(r() % n) : 0; }
inline bool coin(Rng& r, double p) { return static_cast<double>(r() >> 11) * 0x1.0p-53 < p; }

struct AuditResult {
    AuditResult() = default;
    explicit AuditResult(std::string n, std::uint64_t s = 0) : name(std::move(n)), seed(s) {}

    std::string name;
    std::uint64_t seed = 0;
    std::size_t cases = 0;
    std::size_t passed = 0;
    std::size_t skipped = 0;
    std::vector<json> violations;
    json extra = json::object();
    double seconds = 0;

    bool ok() const { return violations.empty(); }

    json to_json() const {
        json j{{"audit", name}, {"seed", seed}, {"cases", cases}, {"passed", passed}, {"skipped", skipped},
               {"violations", violations.size()}};
        for (const auto& [k, v] : extra.items()) j[k] = v;
        j["seconds"] = seconds;
        return j;
    }
};

// ---- JSON views used in reproduction records ----

inline json to_json(const RelationalStructure& s) {
    json rels = json::array();
    for (const auto& r : s.relations) {
        json j{{"name", r.name()}, {"arity", r.arity()}};
        if (r.is_lazy())
            j["lazy"] = true;
        else
            j["tuples"] = r.tuples();
        rels.push_back(std::move(j));
    }
    return json{{"name", s.name}, {"domain", s.domain_size}, {"relations", std::move(rels)}};
}

inline json to_json(const FiniteOperation& f) {
    return json{{"name", f.name()}, {"domain", f.domain_size()}, {"arity", f.arity()}, {"table", f.table()}};
}

inline json to_json(const Algebra& a) {
    json ops = json::array();
    for (const auto& o : a.ops) ops.push_back(o.table());
    return json{{"name", a.name}, {"signature", a.signature}, {"domain", a.domain_size}, {"tables", std::move(ops)}};
}

inline json to_json(const AlgebraSet& b) {
    json j = json::array();
    for (const auto& a : b.members()) j.push_back(to_json(a));
    return j;
}

namespace detail {

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline Rng seeded(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(salt)};
    return Rng(seq);
}

} // namespace detail

// ---- random generators ----

inline Relation random_relation(Rng& rng, std::string name, std::size_t d, std::size_t arity, double density) {
    std::vector<Tuple> ts;
    Tuple t(arity, 0);
    do {
        if (coin(rng, density)) ts.push_back(t);
    } while (arity > 0 && csplift::detail::next_tuple(t, static_cast<Element>(d)));
    return Relation(std::move(name), arity, std::move(ts));
}

inline Relation random_sparse_relation(Rng& rng, std::string name, std::size_t n, std::size_t arity, std::size_t count) {
    std::vector<Tuple> ts;
    for (std::size_t k = 0; k < count; ++k) {
        Tuple t(arity);
        for (auto& x : t) x = static_cast<Element>(pick(rng, n));
        ts.push_back(std::move(t));
    }
    return Relation(std::move(name), arity, std::move(ts));
}

inline RelationalStructure random_boolean_template(Rng& rng) {
    RelationalStructure g{"G", 2, {}};
    const auto k = 1 + pick(rng, 2);
    for (std::size_t i = 0; i < k; ++i)
        g.relations.push_back(random_relation(rng, "r" + std::to_string(i), 2, 1 + pick(rng, 3), 0.5));
    return g;
}

inline FiniteOperation random_operation(Rng& rng, std::size_t d, std::size_t arity, std::string name = "f") {
    std::vector<Element> t(csplift::detail::pow_or_throw(d, arity, "random operation"));
    for (auto& x : t) x = static_cast<Element>(pick(rng, d));
    return FiniteOperation(std::move(name), d, arity, std::move(t));
}

inline Algebra random_algebra(Rng& rng, const std::vector<std::size_t>& sig, std::size_t d) {
    Algebra a{"A", sig, d, {}};
    for (std::size_t i = 0; i < sig.size(); ++i) a.ops.push_back(random_operation(rng, d, sig[i], "o" + std::to_string(i)));
    return a;
}

// Random (V, zero, one, btw) input with |V| in [1, max_vertices].
inline RelationalStructure random_btw_input(Rng& rng, std::size_t max_vertices, double unary_p = 0.4, std::size_t max_triples = 4) {
    const auto n = 1 + pick(rng, max_vertices);
    RelationalStructure r{"R", n, {}};
    std::vector<Tuple> z, o;
    for (Element v = 0; v < n; ++v) {
        if (coin(rng, unary_p)) z.push_back({v});
        if (coin(rng, unary_p)) o.push_back({v});
    }
    r.relations.emplace_back("zero", 1, std::move(z));
    r.relations.emplace_back("one", 1, std::move(o));
    r.relations.push_back(random_sparse_relation(rng, "btw", n, 3, pick(rng, max_triples + 1)));
    return r;
}

// Closes seeds under step (which yields new algebras for the current set); nullopt once the set outgrows limit.
template <class Step>
std::optional<AlgebraSet> close_set(const std::vector<Algebra>& seeds, std::size_t limit, Step step) {
    AlgebraSet set(seeds[0].signature, seeds[0].domain_size);
    for (const auto& a : seeds) set.add(a);
    while (true) {
        bool grew = false;
        for (auto& a : step(set)) {
            if (set.add(std::move(a))) grew = true;
            if (set.size() > limit) return std::nullopt;
        }
        if (!grew) return set;
    }
}

inline bool exhaustive_hom_exists(const RelationalStructure& r, const RelationalStructure& t) {
    if (r.domain_size == 0) return true;
    if (t.domain_size == 0) return false;
    Map m(r.domain_size, 0);
    do {
        if (is_homomorphism(r, t, m)) return true;
    } while (csplift::detail::next_tuple(m, static_cast<Element>(t.domain_size)));
    return false;
}

// ---- corpus ----

inline RelationalStructure clique(std::size_t n) {
    std::vector<Tuple> e;
    for (Element a = 0; a < n; ++a)
        for (Element b = 0; b < n; ++b)
            if (a != b) e.push_back({a, b});
    RelationalStructure s{"K" + std::to_string(n), n, {}};
    s.relations.emplace_back("e", 2, std::move(e));
    return s;
}

inline RelationalStructure cycle(std::size_t n, bool directed = false) {
    std::vector<Tuple> e;
    for (Element a = 0; a < n; ++a) {
        Element b = static_cast<Element>((a + 1) % n);
        e.push_back({a, b});
        if (!directed) e.push_back({b, a});
    }
    RelationalStructure s{(directed ? "DC" : "C") + std::to_string(n), n, {}};
    s.relations.emplace_back("e", 2, std::move(e));
    return s;
}

inline RelationalStructure leq_template() {
    RelationalStructure s{"leq", 2, {}};
    s.relations.emplace_back("le", 2, std::vector<Tuple>{{0, 0}, {0, 1}, {1, 1}});
    return s;
}

inline RelationalStructure boolean_template_from(std::string name, std::size_t arity, const std::function<bool(std::span<const Element>)>& keep) {
    std::vector<Tuple> ts;
    Tuple t(arity, 0);
    do
        if (keep(t)) ts.push_back(t);
    while (csplift::detail::next_tuple(t, 2));
    RelationalStructure s{name, 2, {}};
    s.relations.emplace_back(std::move(name), arity, std::move(ts));
    return s;
}

inline std::vector<RelationalStructure> corpus_templates() {
    std::vector<RelationalStructure> c;
    c.push_back(clique(2));
    c.push_back(clique(3));
    c.push_back(cycle(4));
    c.push_back(cycle(3, true));
    c.push_back(betweenness_template());
    c.push_back(betweenness_alpha_template());
    c.push_back(leq_template());
    c.push_back(boolean_template_from("horn", 3, [](auto t) { return !(t[0] && t[1]) || t[2]; }));
    c.push_back(boolean_template_from("one_in_three", 3, [](auto t) { return t[0] + t[1] + t[2] == 1; }));
    c.push_back(boolean_template_from("nae", 3, [](auto t) { return !(t[0] == t[1] && t[1] == t[2]); }));
    c.push_back(boolean_template_from("xor", 3, [](auto t) { return (t[0] ^ t[1] ^ t[2]) == 1; }));
    RelationalStructure z3{"z3sum", 3, {}};
    std::vector<Tuple> sum;
    for (Element a = 0; a < 3; ++a)
        for (Element b = 0; b < 3; ++b) sum.push_back({a, b, static_cast<Element>((a + b) % 3)});
    z3.relations.emplace_back("sum", 3, std::move(sum));
    c.push_back(std::move(z3));
    return c;
}

// Constants, both projections and (for |D| = 2) min and max, in signature (b,2).
inline AlgebraSet small_extending_set(std::size_t d) {
    const std::vector<std::size_t> sig{2};
    AlgebraSet b(sig, d);
    for (Element a = 0; a < d; ++a) b.add(constant_algebra(a, sig, d));
    b.add(Algebra{"proj0", sig, d, {FiniteOperation::projection(d, 2, 0)}});
    b.add(Algebra{"proj1", sig, d, {FiniteOperation::projection(d, 2, 1)}});
    if (d == 2) {
        b.add(Algebra{"min", sig, d, {boolean_ops::min2()}});
        b.add(Algebra{"max", sig, d, {boolean_ops::max2()}});
    }
    return b;
}

// The Boolean binary algebras whose operation passes the Boolean tractability test.
inline AlgebraSet boolean_tractable_binary_algebras() {
    return all_algebras({2}, 2, [](const Algebra& a) { return boolean_algebra_tractable(a.ops); });
}

// ---- audits ----

inline AuditResult hom_oracle(std::uint64_t seed, std::size_t cases) {
    detail::Stopwatch sw;
    AuditResult res("homomorphism-oracle", seed);
    auto rng = detail::seeded(seed, 1);
    std::size_t positive = 0;
    for (std::size_t c = 0; c < cases; ++c) {
        const auto td = 1 + pick(rng, 4);
        std::size_t rn = 1 + pick(rng, 6);
        while (rn > 1 && *csplift::detail::checked_pow(td, rn) > 100'000) --rn;
        RelationalStructure t{"T", td, {}}, r{"R", rn, {}};
        const auto k = 1 + pick(rng, 2);
        for (std::size_t i = 0; i < k; ++i) {
            const auto a = 1 + pick(rng, 3);
            t.relations.push_back(random_relation(rng, "r" + std::to_string(i), td, a, 0.2 + 0.6 * coin(rng, 0.5)));
            r.relations.push_back(random_sparse_relation(rng, "r" + std::to_string(i), rn, a, pick(rng, 6)));
        }
        auto found = find_homomorphism(r, t);
        bool truth = exhaustive_hom_exists(r, t);
        bool valid = !found || is_homomorphism(r, t, *found);
        ++res.cases;
        positive += truth;
        if (found.has_value() == truth && valid)
            ++res.passed;
        else
            res.violations.push_back({{"case", c}, {"seed", seed}, {"solver", found.has_value()}, {"exhaustive", truth},
                                      {"R", to_json(r)}, {"T", to_json(t)}});
    }
    res.extra["positive"] = positive;
    res.seconds = sw.seconds();
    return res;
}

inline AuditResult homtoG(std::uint64_t seed, std::size_t cases, std::size_t max_vertices = 4) {
    detail::Stopwatch sw;
    AuditResult res("siggers-pair-biconditional", seed);
    auto rng = detail::seeded(seed, 2);
    const auto gamma = betweenness_template();
    std::size_t positive = 0;
    for (std::size_t c = 0; c < cases; ++c) {
        auto r = random_btw_input(rng, max_vertices);
        auto rep = check_homtoG(r, gamma);
        ++res.cases;
        positive += rep.admitted.has_value();
        if (rep.agree && rep.witnesses_valid)
            ++res.passed;
        else
            res.violations.push_back({{"case", c}, {"seed", seed}, {"indicator", rep.admitted.has_value()},
                                      {"gamma_prime", rep.hom.has_value()}, {"detail", rep.detail}, {"R", to_json(r)}});
    }
    res.extra["positive"] = positive;
    res.seconds = sw.seconds();
    return res;
}

inline AuditResult embeddings() {
    detail::Stopwatch sw;
    AuditResult res("embeddings");
    for (const auto& g : corpus_templates()) {
        ++res.cases;
        auto pe = constant_pair_embedding(g);
        bool below = is_homomorphism(g, pe.target.structure, pe.map);
        auto b = small_extending_set(g.domain_size);
        auto gb = build_gamma_B(g, b);
        bool ext = is_homomorphism(g, gb, extending_embedding(g, b));
        if (below && ext)
            ++res.passed;
        else
            res.violations.push_back({{"template", to_json(g)}, {"constant_pair_embedding", below}, {"extending_embedding", ext}});
    }
    res.seconds = sw.seconds();
    return res;
}

// Counts Siggers pairs on {0,1} by testing every (g, s) directly, without the library's enumerator.
inline std::pair<std::uint64_t, std::uint64_t> brute_force_siggers_census() {
    std::uint64_t total = 0, constant_g = 0;
    for (int g = 0; g < 4; ++g) {
        const int g0 = g >> 1 & 1, g1 = g & 1;  // g(0), g(1): table order
        bool img[2] = {false, false};
        img[g0] = img[g1] = true;
        for (std::uint32_t s = 0; s < (1u << 16); ++s) {
            auto at = [s](int a, int b, int c, int d) { return (s >> (15 - (a * 8 + b * 4 + c * 2 + d))) & 1; };
            bool ok = true;
            for (int x = 0; x < 2 && ok; ++x)
                for (int y = 0; y < 2 && ok; ++y)
                    for (int z = 0; z < 2 && ok; ++z)
                        if (img[x] && img[y] && img[z] && at(x, y, x, z) != at(y, x, z, y)) ok = false;
            for (int a = 0; a < 2 && ok; ++a)
                if (img[a] && at(a, a, a, a) != static_cast<std::uint32_t>(a)) ok = false;
            for (int a = 0; a < 16 && ok; ++a) {
                bool in = img[a >> 3 & 1] && img[a >> 2 & 1] && img[a >> 1 & 1] && img[a & 1];
                if (in && !img[at(a >> 3 & 1, a >> 2 & 1, a >> 1 & 1, a & 1)]) ok = false;
            }
            if (ok) {
                ++total;
                if (g0 == g1) ++constant_g;
            }
        }
    }
    return {total, constant_g};
}

inline AuditResult siggers_census() {
    detail::Stopwatch sw;
    AuditResult res("siggers-census");
    auto pairs = enumerate_siggers_pairs(2);
    std::uint64_t lib_const = 0;
    for (const auto& p : pairs) lib_const += p.g.at(0) == p.g.at(1);
    auto [total, constant_g] = brute_force_siggers_census();
    res.cases = 1;
    res.extra = {{"library_count", pairs.size()}, {"brute_force_count", total}, {"library_constant_g", lib_const},
                 {"brute_force_constant_g", constant_g}};
    if (pairs.size() == total && lib_const == constant_g && constant_g == 2u * (1u << 15))
        res.passed = 1;
    else
        res.violations.push_back(res.extra);
    res.seconds = sw.seconds();
    return res;
}

inline transport::Case random_transport_case(Rng& rng, std::size_t kind) {
    using namespace transport;
    const std::size_t d = 2;
    switch (kind) {
    case 0: {
        const auto n = 2 + pick(rng, 2);
        auto f = random_operation(rng, d, n, "f");
        auto g = FiniteOperation::from_function("g", d, n - 1, [&](std::span<const Element> x) {
            Tuple y(x.begin(), x.end());
            y.push_back(x.back());
            return f(y);
        });
        return Identification{f, g};
    }
    case 1: {
        const auto n = 2 + pick(rng, 2);
        auto g = random_operation(rng, d, n - 1, "g");
        auto f = FiniteOperation::from_function("f", d, n, [&](std::span<const Element> x) { return g(x.first(n - 1)); });
        return Fictitious{f, g};
    }
    case 2: {
        const auto n = 1 + pick(rng, 3);
        auto f = random_operation(rng, d, n, "f");
        std::vector<std::size_t> pi(n);
        std::iota(pi.begin(), pi.end(), 0);
        for (std::size_t i = n; i > 1; --i) std::swap(pi[i - 1], pi[pick(rng, i)]);
        auto g = FiniteOperation::from_function("g", d, n, [&](std::span<const Element> x) {
            Tuple y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = x[pi[i]];
            return f(y);
        });
        return Permutation{f, g, pi};
    }
    case 3: {
        const auto n = 1 + pick(rng, 4);
        return Projection{n, pick(rng, n), d};
    }
    default: {
        const auto m = 1 + pick(rng, 3), n = 1 + pick(rng, 3);
        auto f = random_operation(rng, d, n, "f");
        std::vector<FiniteOperation> parts;
        for (std::size_t i = 0; i < n; ++i) parts.push_back(random_operation(rng, d, m, "g" + std::to_string(i + 1)));
        auto g = FiniteOperation::from_function("g", d, m, [&](std::span<const Element> x) {
            Tuple y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = parts[i](x);
            return f(y);
        });
        return Superposition{g, f, parts};
    }
    }
}

inline std::size_t transport_variable_count(const transport::Case& c) {
    using namespace transport;
    if (auto k = std::get_if<Identification>(&c)) return k->f.arity() - 1;
    if (auto k = std::get_if<Fictitious>(&c)) return k->f.arity();
    if (auto k = std::get_if<Permutation>(&c)) return k->f.arity();
    if (auto k = std::get_if<Projection>(&c)) return k->n;
    return std::get<Superposition>(c).g.arity();
}

inline json to_json(const transport::Case& c) {
    using namespace transport;
    json j{{"kind", name_of(c)}};
    std::visit([&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Projection>) {
            j["n"] = k.n;
            j["i"] = k.i;
        } else {
            j["f"] = to_json(k.f);
            j["g"] = to_json(k.g);
            if constexpr (std::is_same_v<K, Permutation>) j["pi"] = k.pi;
            if constexpr (std::is_same_v<K, Superposition>) {
                j["parts"] = json::array();
                for (const auto& p : k.parts) j["parts"].push_back(to_json(p));
            }
        }
    }, c);
    return j;
}

// cases_per_kind random cases for each of the five transport statements, sigma = (b,2), |D| = 2.
inline AuditResult transport_audit(std::uint64_t seed, std::size_t cases_per_kind) {
    detail::Stopwatch sw;
    AuditResult res("transport", seed);
    auto rng = detail::seeded(seed, 3);
    const std::vector<std::size_t> sig{2};
    json per_kind = json::object();
    for (std::size_t kind = 0; kind < 5; ++kind) {
        std::size_t ok = 0;
        for (std::size_t c = 0; c < cases_per_kind; ++c) {
            auto tc = random_transport_case(rng, kind);
            std::vector<Algebra> args;
            for (std::size_t i = 0; i < transport_variable_count(tc); ++i) args.push_back(random_algebra(rng, sig, 2));
            ++res.cases;
            if (term_transport_check(tc, args)) {
                ++res.passed;
                ++ok;
            } else {
                json algebras = json::array();
                for (const auto& a : args) algebras.push_back(to_json(a));
                res.violations.push_back({{"case", c}, {"seed", seed}, {"transport", to_json(tc)}, {"algebras", algebras}});
            }
        }
        static const char* names[] = {"identification", "fictitious", "permutation", "projection", "superposition"};
        per_kind[names[kind]] = ok;
    }
    res.extra["per_kind"] = per_kind;
    res.seconds = sw.seconds();
    return res;
}

namespace detail {
inline std::vector<FiniteOperation> polymorphisms_among(const RelationalStructure& g, std::size_t arity) {
    std::vector<FiniteOperation> out;
    const auto rows = csplift::detail::pow_or_throw(2, arity, "table");
    std::vector<Element> t(rows, 0);
    do {
        FiniteOperation f("f", 2, arity, t);
        if (is_polymorphism(f, g)) out.push_back(std::move(f));
    } while (csplift::detail::next_tuple(t, 2));
    return out;
}
} // namespace detail

inline bool is_projection(const FiniteOperation& f) {
    for (std::size_t i = 0; i < f.arity(); ++i)
        if (f == FiniteOperation::projection(f.domain_size(), f.arity(), i)) return true;
    return false;
}

// Random Boolean templates and f in Pol(G); the algebra set is the closure of one or two
// random algebras under the lifted f, kept when it has at most four members.
inline AuditResult outside_polymorphism_audit(std::uint64_t seed, std::size_t cases, std::size_t max_set = 4) {
    detail::Stopwatch sw;
    AuditResult res("outside-polymorphism", seed);
    auto rng = detail::seeded(seed, 4);
    const std::vector<std::size_t> sig{2};
    std::size_t attempts = 0, nontrivial = 0, set_sizes = 0;
    while (res.cases < cases && attempts < 200 * cases) {
        ++attempts;
        auto g = random_boolean_template(rng);
        auto pols = detail::polymorphisms_among(g, 1 + pick(rng, 2));
        std::vector<FiniteOperation> rich;
        for (const auto& p : pols)
            if (!is_projection(p)) rich.push_back(p);
        auto f = !rich.empty() && coin(rng, 0.8) ? rich[pick(rng, rich.size())] : pols[pick(rng, pols.size())];
        std::vector<Algebra> seeds{random_algebra(rng, sig, 2)};
        if (coin(rng, 0.5)) seeds.push_back(random_algebra(rng, sig, 2));
        auto b = close_set(seeds, max_set, [&](const AlgebraSet& s) {
            std::vector<Algebra> out;
            Tuple pickv(f.arity(), 0);
            std::vector<const Algebra*> args(f.arity());
            do {
                for (std::size_t j = 0; j < args.size(); ++j) args[j] = &s[pickv[j]];
                out.push_back(outside_apply(f, std::span<const Algebra* const>(args)));
            } while (csplift::detail::next_tuple(pickv, static_cast<Element>(s.size())));
            return out;
        });
        if (!b) continue;
        auto outcome = verify_outside_polymorphism(f, g, *b);
        nontrivial += !is_projection(f);
        set_sizes += b->size();
        if (outcome.status == AuditStatus::skipped) {
            ++res.skipped;
            continue;
        }
        ++res.cases;
        if (outcome.status == AuditStatus::passed)
            ++res.passed;
        else
            res.violations.push_back({{"case", res.cases - 1}, {"seed", seed}, {"reason", outcome.reason}, {"template", to_json(g)},
                                      {"f", to_json(f)}, {"algebras", to_json(*b)}});
    }
    res.extra["attempts"] = attempts;
    res.extra["non_projection_cases"] = nontrivial;
    res.extra["total_set_size"] = set_sizes;
    res.seconds = sw.seconds();
    return res;
}

inline AuditResult inside_polymorphism_audit(std::uint64_t seed, std::size_t cases, std::size_t max_set = 4) {
    detail::Stopwatch sw;
    AuditResult res("inside-polymorphism", seed);
    auto rng = detail::seeded(seed, 5);
    const std::vector<std::size_t> sig{2};
    std::size_t attempts = 0, nontrivial = 0, set_sizes = 0;
    while (res.cases < cases && attempts < 200 * cases) {
        ++attempts;
        auto g = random_boolean_template(rng);
        auto pols = detail::polymorphisms_among(g, 2);
        OperationSystem fbar{sig, {{pols[pick(rng, pols.size())], pols[pick(rng, pols.size())]}}};
        std::vector<Algebra> seeds{random_algebra(rng, sig, 2)};
        if (coin(rng, 0.5)) seeds.push_back(random_algebra(rng, sig, 2));
        auto b = close_set(seeds, max_set, [&](const AlgebraSet& s) {
            std::vector<Algebra> out;
            for (const auto& a : s.members()) out.push_back(inside_apply(fbar, a));
            return out;
        });
        if (!b) continue;
        auto outcome = verify_inside_polymorphism(fbar, g, *b);
        nontrivial += !is_projection(fbar.ops[0][0]) || !is_projection(fbar.ops[0][1]);
        set_sizes += b->size();
        if (outcome.status == AuditStatus::skipped) {
            ++res.skipped;
            continue;
        }
        ++res.cases;
        if (outcome.status == AuditStatus::passed)
            ++res.passed;
        else
            res.violations.push_back({{"case", res.cases - 1}, {"seed", seed}, {"reason", outcome.reason}, {"template", to_json(g)},
                                      {"f1", to_json(fbar.ops[0][0])}, {"f2", to_json(fbar.ops[0][1])}, {"algebras", to_json(*b)}});
    }
    res.extra["attempts"] = attempts;
    res.extra["non_projection_cases"] = nontrivial;
    res.extra["total_set_size"] = set_sizes;
    res.seconds = sw.seconds();
    return res;
}

inline AuditResult minv_audit(std::uint64_t seed, std::size_t cases) {
    detail::Stopwatch sw;
    AuditResult res("lifted-in-minv", seed);
    auto rng = detail::seeded(seed, 6);
    for (std::size_t c = 0; c < cases; ++c) {
        auto g = random_boolean_template(rng);
        std::vector<std::size_t> sig = coin(rng, 0.5) ? std::vector<std::size_t>{2} : std::vector<std::size_t>{1, 2};
        AlgebraSet b(sig, 2);
        const auto k = 1 + pick(rng, 4);
        while (b.size() < k) b.add(random_algebra(rng, sig, 2));
        auto out = lifted_in_minv_check(g, b);
        ++res.cases;
        if (out.passed)
            ++res.passed;
        else
            res.violations.push_back({{"case", c}, {"seed", seed}, {"failure", out.failure}, {"template", to_json(g)}, {"algebras", to_json(b)}});
    }
    res.seconds = sw.seconds();
    return res;
}

inline AuditResult pipeline_audit(std::uint64_t seed, std::size_t cases, std::size_t max_vertices = 4) {
    detail::Stopwatch sw;
    AuditResult res("reduction-pipeline", seed);
    auto rng = detail::seeded(seed, 7);
    const auto gamma = betweenness_template();
    const auto b = boolean_tractable_binary_algebras();
    std::size_t positive = 0, step1 = 0;
    for (std::size_t c = 0; c < cases; ++c) {
        auto r = random_btw_input(rng, max_vertices);
        auto out = reduction_pipeline(gamma, b, r);
        bool truth = exhaustive_hom_exists(r, gamma);
        bool cert = !out.assignment || is_homomorphism(r, gamma, *out.assignment);
        ++res.cases;
        positive += truth;
        step1 += out.decided_at_step == 1;
        if (out.member == truth && cert)
            ++res.passed;
        else
            res.violations.push_back({{"case", c}, {"seed", seed}, {"pipeline", out.member}, {"direct", truth},
                                      {"certificate_valid", cert}, {"R", to_json(r)}});
    }
    res.extra["positive"] = positive;
    res.extra["decided_at_step_1"] = step1;
    res.extra["tractable_set"] = to_string(is_tractable_set(b, boolean_schaefer_oracle()).overall);
    res.seconds = sw.seconds();
    return res;
}

// Draws g first, then only constraints that g satisfies in Gamma_alpha.
inline std::pair<RelationalStructure, Map> random_betweenness_case(Rng& rng, std::size_t max_vertices = 6) {
    const auto n = 1 + pick(rng, max_vertices);
    const auto ga = betweenness_alpha_template();
    Map g(n);
    for (auto& x : g) x = static_cast<Element>(pick(rng, 3));
    RelationalStructure r{"R", n, {}};
    std::vector<Tuple> z, o, t;
    for (Element v = 0; v < n; ++v) {
        if (g[v] != 1 && coin(rng, 0.4)) z.push_back({v});
        if (g[v] != 0 && coin(rng, 0.4)) o.push_back({v});
    }
    const auto want = pick(rng, 2 * n + 1);
    for (std::size_t k = 0, tries = 0; k < want && tries < 50 * (want + 1); ++tries) {
        Tuple x{static_cast<Element>(pick(rng, n)), static_cast<Element>(pick(rng, n)), static_cast<Element>(pick(rng, n))};
        Tuple y{g[x[0]], g[x[1]], g[x[2]]};
        if (ga.relations[2].contains(y)) {
            t.push_back(x);
            ++k;
        }
    }
    r.relations.emplace_back("zero", 1, std::move(z));
    r.relations.emplace_back("one", 1, std::move(o));
    r.relations.emplace_back("btw", 3, std::move(t));
    return {std::move(r), std::move(g)};
}

inline AuditResult betweenness_audit(std::uint64_t seed, std::size_t cases) {
    detail::Stopwatch sw;
    AuditResult res("binary-betweenness", seed);
    auto rng = detail::seeded(seed, 8);
    const auto gamma = betweenness_template();
    std::size_t positive = 0;
    for (std::size_t c = 0; c < cases; ++c) {
        auto [r, g] = random_betweenness_case(rng);
        auto out = betweenness_example(r, g);
        bool truth = exhaustive_hom_exists(r, gamma);
        bool found = out.kind == BetweennessOutcome::Kind::found;
        ++res.cases;
        positive += truth;
        if (found == truth && out.kind != BetweennessOutcome::Kind::invalid)
            ++res.passed;
        else
            res.violations.push_back({{"case", c}, {"seed", seed}, {"algorithm", found}, {"invalid_h", out.kind == BetweennessOutcome::Kind::invalid},
                                      {"brute_force", truth}, {"R", to_json(r)}, {"g", g}});
    }
    res.extra["positive"] = positive;
    res.seconds = sw.seconds();
    return res;
}

inline bool is_connected(std::size_t n, std::span<const std::pair<Element, Element>> edges) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    std::size_t comps = n;
    for (auto [a, b] : edges) {
        auto x = find(a), y = find(b);
        if (x != y) parent[x] = y, --comps;
    }
    return comps <= 1;
}

// Every labelled connected simple graph on 1..max_vertices vertices.
inline AuditResult bipartite_audit(std::size_t max_vertices = 5) {
    detail::Stopwatch sw;
    AuditResult res("bipartite-example");
    std::size_t bip = 0;
    for (std::size_t n = 1; n <= max_vertices; ++n) {
        std::vector<std::pair<Element, Element>> all;
        for (Element a = 0; a < n; ++a)
            for (Element b = a + 1; b < n; ++b) all.emplace_back(a, b);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << all.size()); ++mask) {
            std::vector<std::pair<Element, Element>> e;
            for (std::size_t k = 0; k < all.size(); ++k)
                if (mask >> k & 1) e.push_back(all[k]);
            if (!is_connected(n, e)) continue;
            auto g = graph_instance(n, e);
            auto v = bipartite_example_check(g);
            ++res.cases;
            bip += v.bipartite;
            if (v.agree)
                ++res.passed;
            else
                res.violations.push_back({{"graph", to_json(g)}, {"hom_found", v.hom_found}, {"bipartite", v.bipartite}});
        }
    }
    res.extra["bipartite"] = bip;
    res.seconds = sw.seconds();
    return res;
}

} // namespace csplift::audit
