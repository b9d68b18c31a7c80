#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "lifted.hpp"
#include "operations.hpp"
#include "solver.hpp"

namespace csplift {

namespace detail {
inline bool gamma_prime_member(const Relation& rho, std::span<const SiggersPair* const> pairs) {
    const auto m = rho.arity();
    if (pairs.size() != m) throw SignatureError("gamma_prime_membership: pair count differs from relation arity");
    const auto& rows = rho.tuples();
    Tuple out(m);
    for (const auto& x : rows) {
        for (std::size_t j = 0; j < m; ++j) out[j] = pairs[j]->g.at(x[j]);
        if (!rho.contains(out)) return false;
    }
    if (m == 0 || rows.empty()) return true;
    const auto d = static_cast<std::uint64_t>(pairs[0]->s.domain_size());
    std::vector<const Element*> st(m);
    for (std::size_t j = 0; j < m; ++j) st[j] = pairs[j]->s.table().data();
    std::vector<std::uint64_t> p1(m), p2(m), p3(m);
    for (const auto& a : rows) {
        for (std::size_t j = 0; j < m; ++j) p1[j] = a[j];
        for (const auto& b : rows) {
            for (std::size_t j = 0; j < m; ++j) p2[j] = p1[j] * d + b[j];
            for (const auto& c : rows) {
                for (std::size_t j = 0; j < m; ++j) p3[j] = p2[j] * d + c[j];
                for (const auto& e : rows) {
                    for (std::size_t j = 0; j < m; ++j) out[j] = st[j][p3[j] * d + e[j]];
                    if (!rho.contains(out)) return false;
                }
            }
        }
    }
    return true;
}
} // namespace detail

// Clause (a): g's map every tuple of rho into rho (componentwise).
// Clause (b): s's map every 4 tuples of rho into rho (componentwise).
inline bool gamma_prime_membership(const Relation& rho, std::span<const SiggersPair> pairs) {
    std::vector<const SiggersPair*> ptrs;
    for (const auto& p : pairs) ptrs.push_back(&p);
    return detail::gamma_prime_member(rho, ptrs);
}

inline bool is_pair_homomorphism(const RelationalStructure& r, const RelationalStructure& gamma,
                                 std::span<const SiggersPair> images) {
    require_compatible(r, gamma);
    if (images.size() != r.domain_size) return false;
    for (const auto& p : images)
        if (p.g.domain_size() != gamma.domain_size || !is_siggers_pair(p.g, p.s)) return false;
    std::vector<SiggersPair> buf;
    for (std::size_t i = 0; i < r.relations.size(); ++i)
        for (const auto& t : r.relations[i].tuples()) {
            buf.clear();
            for (auto v : t) buf.push_back(images[v]);
            if (!gamma_prime_membership(gamma.relations[i], buf)) return false;
        }
    return true;
}

// Gamma' restricted to a catalog of Siggers pairs. With the full catalog
// (domain size <= 2) this is Gamma' itself; otherwise an induced substructure.
struct GammaPrime {
    RelationalStructure base;
    std::shared_ptr<const std::vector<SiggersPair>> elements;
    RelationalStructure structure;
    std::shared_ptr<const std::map<std::vector<Element>, Element>> index;

    std::size_t size() const { return elements->size(); }
    const SiggersPair& pair(Element i) const { return (*elements)[i]; }
    std::optional<Element> index_of(const SiggersPair& p) const {
        auto k = p.g.table();
        k.insert(k.end(), p.s.table().begin(), p.s.table().end());
        auto it = index->find(k);
        if (it == index->end()) return std::nullopt;
        return it->second;
    }
    std::vector<SiggersPair> pairs_of(const Map& m) const {
        std::vector<SiggersPair> out;
        for (auto x : m) out.push_back(pair(x));
        return out;
    }
};

inline GammaPrime gamma_prime_over(const RelationalStructure& gamma, std::shared_ptr<const std::vector<SiggersPair>> catalog) {
    GammaPrime gp;
    gp.base = gamma;
    gp.elements = catalog;
    auto idx = std::make_shared<std::map<std::vector<Element>, Element>>();
    for (std::size_t i = 0; i < catalog->size(); ++i) {
        const auto& p = (*catalog)[i];
        if (p.g.domain_size() != gamma.domain_size || !is_siggers_pair(p.g, p.s))
            throw PreconditionError("gamma_prime_over: catalog entry " + std::to_string(i) + " is not a Siggers pair");
        auto k = p.g.table();
        k.insert(k.end(), p.s.table().begin(), p.s.table().end());
        idx->emplace(std::move(k), static_cast<Element>(i));
    }
    gp.index = idx;
    gp.structure.name = gamma.name + "_prime";
    gp.structure.domain_size = catalog->size();
    for (const auto& rho : gamma.relations) {
        auto pred = [rho, catalog](std::span<const Element> t) {
            std::vector<const SiggersPair*> ps;
            ps.reserve(t.size());
            for (auto x : t) ps.push_back(&(*catalog)[x]);
            return detail::gamma_prime_member(rho, ps);
        };
        gp.structure.relations.push_back(Relation::lazy(rho.name() + "'", rho.arity(), catalog->size(), pred));
    }
    return gp;
}

inline std::shared_ptr<const std::vector<SiggersPair>> siggers_catalog(std::size_t d) {
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const std::vector<SiggersPair>>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    auto v = std::make_shared<const std::vector<SiggersPair>>(enumerate_siggers_pairs(d));
    cache.emplace(d, v);
    return v;
}

inline GammaPrime build_gamma_prime(const RelationalStructure& gamma) {
    if (gamma.domain_size >= 3)
        throw CapacityError("build_gamma_prime: domain size " + std::to_string(gamma.domain_size) +
                            " cannot be materialized; use gamma_prime_over with an explicit catalog");
    return gamma_prime_over(gamma, siggers_catalog(gamma.domain_size));
}

struct PairEmbedding {
    GammaPrime target;
    Map map;
};

// a -> (const_a, const_a). For domains of size >= 3 the target is the induced
// substructure on the constant pairs.
inline PairEmbedding constant_pair_embedding(const RelationalStructure& gamma) {
    PairEmbedding e;
    if (gamma.domain_size <= 2) {
        e.target = build_gamma_prime(gamma);
        for (Element a = 0; a < gamma.domain_size; ++a) e.map.push_back(*e.target.index_of(constant_pair(gamma.domain_size, a)));
    } else {
        auto cat = std::make_shared<std::vector<SiggersPair>>();
        for (Element a = 0; a < gamma.domain_size; ++a) cat->push_back(constant_pair(gamma.domain_size, a));
        e.target = gamma_prime_over(gamma, cat);
        for (Element a = 0; a < gamma.domain_size; ++a) e.map.push_back(a);
    }
    return e;
}

// v -> (g'_v, s'_v), the blockwise restrictions of (g,s) read over D.
inline std::vector<SiggersPair> hom_from_siggers_pair(const RelationalStructure& r, const RelationalStructure& gamma,
                                                      const SiggersPair& pair) {
    auto l = lift_language(gamma, r);
    const auto n = l.structure.domain_size;
    const auto d = gamma.domain_size;
    if (pair.g.domain_size() != n || pair.s.domain_size() != n)
        throw PreconditionError("hom_from_siggers_pair: pair is not over the lifted domain");
    if (!is_siggers_pair(pair.g, pair.s)) throw PreconditionError("hom_from_siggers_pair: not a Siggers pair on D_R");
    for (const auto& rel : l.structure.relations) {
        if (!preserves_relation(pair.g, rel))
            throw PreconditionError("hom_from_siggers_pair: g does not preserve " + rel.name());
        if (!preserves_relation(pair.s, rel))
            throw PreconditionError("hom_from_siggers_pair: s does not preserve " + rel.name());
    }
    std::vector<SiggersPair> out;
    for (Element v = 0; v < r.domain_size; ++v) {
        auto g = FiniteOperation::from_function("g", d, 1, [&](auto x) { return l.local_of(pair.g.at(l.encode(v, x[0]))); });
        auto s = FiniteOperation::from_function("s", d, 4, [&](auto x) {
            Element a[4] = {l.encode(v, x[0]), l.encode(v, x[1]), l.encode(v, x[2]), l.encode(v, x[3])};
            return l.local_of(pair.s(std::span<const Element>(a, 4)));
        });
        out.push_back({std::move(g), std::move(s)});
    }
    return out;
}

// Blockwise assembly; cross-block entries of s are the least element of g(D_R).
inline SiggersPair siggers_pair_from_hom(const RelationalStructure& r, const RelationalStructure& gamma,
                                         std::span<const SiggersPair> images) {
    if (images.size() != r.domain_size) throw PreconditionError("siggers_pair_from_hom: map is not total");
    const auto d = static_cast<Element>(gamma.domain_size);
    const auto n = r.domain_size * d;
    auto g = FiniteOperation::from_function("g", n, 1, [&](auto x) {
        Element v = x[0] / d;
        return v * d + images[v].g.at(x[0] % d);
    });
    Element c = 0;
    if (n > 0) c = image_of(g).front();
    auto s = FiniteOperation::from_function("s", n, 4, [&](auto x) {
        Element v = x[0] / d;
        for (int k = 1; k < 4; ++k)
            if (x[k] / d != v) return c;
        Element a[4] = {x[0] % d, x[1] % d, x[2] % d, x[3] % d};
        return v * d + images[v].s(std::span<const Element>(a, 4));
    });
    return {std::move(g), std::move(s)};
}

struct HomtoGReport {
    bool agree = false;
    std::optional<SiggersPair> admitted;        // on D_R
    std::optional<Map> hom;                     // into build_gamma_prime(gamma)
    bool witnesses_valid = true;
    std::string detail;
};

inline SearchOptions lazy_search_options(SearchOptions base = {}) {
    base.order = VarOrder::smallest_domain;
    return base;
}

inline HomtoGReport check_homtoG(const RelationalStructure& r, const RelationalStructure& gamma, SearchOptions opts = {}) {
    HomtoGReport rep;
    auto l = lift_language(gamma, r);
    rep.admitted = find_siggers_pair_admitted(l.structure, opts);
    auto gp = build_gamma_prime(gamma);
    rep.hom = find_homomorphism(r, gp.structure, lazy_search_options(opts));
    rep.agree = rep.admitted.has_value() == rep.hom.has_value();
    if (rep.hom) {
        auto images = gp.pairs_of(*rep.hom);
        auto back = siggers_pair_from_hom(r, gamma, images);
        bool ok = is_siggers_pair(back.g, back.s);
        for (const auto& rel : l.structure.relations)
            ok = ok && preserves_relation(back.g, rel) && preserves_relation(back.s, rel);
        if (!ok) {
            rep.witnesses_valid = false;
            rep.detail += "pair assembled from the homomorphism fails the Siggers-pair checks; ";
        }
    }
    if (rep.admitted) {
        auto images = hom_from_siggers_pair(r, gamma, *rep.admitted);
        if (!is_pair_homomorphism(r, gamma, images)) {
            rep.witnesses_valid = false;
            rep.detail += "restricted pair map is not a homomorphism into Gamma'; ";
        }
    }
    return rep;
}

// Enumerates a lazy structure's relations into tuples (guarded by limit).
inline RelationalStructure materialize(const RelationalStructure& s, std::uint64_t limit = 1'000'000) {
    RelationalStructure out;
    out.name = s.name;
    out.domain_size = s.domain_size;
    for (const auto& rel : s.relations) {
        if (!rel.is_lazy()) {
            out.relations.push_back(rel);
            continue;
        }
        auto space = detail::checked_pow(s.domain_size, rel.arity());
        if (!space || *space > limit)
            throw CapacityError("materialize: relation '" + rel.name() + "' has too many candidate tuples");
        std::vector<Tuple> ts;
        Tuple t(rel.arity(), 0);
        if (s.domain_size > 0 || rel.arity() == 0) do {
                if (rel.contains(t)) ts.push_back(t);
            } while (!t.empty() && detail::next_tuple(t, static_cast<Element>(s.domain_size)));
        out.relations.emplace_back(rel.name(), rel.arity(), std::move(ts));
    }
    return out;
}

// Membership in the relations of (Gamma')', for pairs over D'. Only feasible when
// Gamma' is tiny, since rho' has to be enumerated.
inline bool gamma_double_prime_membership(const GammaPrime& gp, std::size_t relation, std::span<const SiggersPair> pairs) {
    auto rho = materialize(RelationalStructure{"", gp.structure.domain_size, {gp.structure.relations.at(relation)}});
    return gamma_prime_membership(rho.relations[0], pairs);
}

// ---- binary betweenness ----

inline RelationalStructure betweenness_template() {
    std::vector<Tuple> btw;
    for (Element a = 0; a < 2; ++a)
        for (Element b = 0; b < 2; ++b)
            for (Element c = 0; c < 2; ++c)
                if (!((a == 0 && b == 1 && c == 0) || (a == 1 && b == 0 && c == 1))) btw.push_back({a, b, c});
    RelationalStructure s;
    s.name = "btw";
    s.domain_size = 2;
    s.relations.emplace_back("zero", 1, std::vector<Tuple>{{0}});
    s.relations.emplace_back("one", 1, std::vector<Tuple>{{1}});
    s.relations.emplace_back("btw", 3, std::move(btw));
    return s;
}

inline constexpr Element alpha = 2;

inline RelationalStructure betweenness_alpha_template() {
    auto base = betweenness_template();
    auto tuples = base.relations[2].tuples();
    for (Tuple t : std::vector<Tuple>{{1, 1, alpha}, {alpha, 1, 1}, {0, 0, alpha}, {alpha, 0, 0}, {0, alpha, 1}, {1, alpha, 0}})
        tuples.push_back(t);
    RelationalStructure s;
    s.name = "btw_alpha";
    s.domain_size = 3;
    s.relations.emplace_back("zero", 1, std::vector<Tuple>{{0}, {alpha}});
    s.relations.emplace_back("one", 1, std::vector<Tuple>{{1}, {alpha}});
    s.relations.emplace_back("btw", 3, std::move(tuples));
    return s;
}

struct BetweennessOutcome {
    enum class Kind { absent, found, invalid } kind = Kind::absent;
    Map h;  // set for found and invalid
};

inline BetweennessOutcome betweenness_example(const RelationalStructure& r, std::span<const Element> g) {
    const auto ga = betweenness_alpha_template();
    if (!is_homomorphism(r, ga, g)) throw PreconditionError("betweenness_example: g is not a homomorphism into Gamma_alpha");
    std::vector<bool> in0(r.domain_size, false), in1(r.domain_size, false);
    for (const auto& t : r.relations[0].tuples()) in0[t[0]] = true;
    for (const auto& t : r.relations[1].tuples()) in1[t[0]] = true;
    for (std::size_t x = 0; x < r.domain_size; ++x)
        if (in0[x] && in1[x]) return {};
    BetweennessOutcome out;
    out.h.resize(r.domain_size);
    for (std::size_t x = 0; x < r.domain_size; ++x) {
        if (g[x] != alpha)
            out.h[x] = g[x];
        else if (in0[x])
            out.h[x] = 0;
        else if (in1[x])
            out.h[x] = 1;
        else
            out.h[x] = 0;
    }
    out.kind = is_homomorphism(r, betweenness_template(), out.h) ? BetweennessOutcome::Kind::found
                                                                  : BetweennessOutcome::Kind::invalid;
    return out;
}

} // namespace csplift
