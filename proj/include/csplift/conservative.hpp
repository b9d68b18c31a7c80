#pragma once

#include <array>
#include <deque>
#include <functional>

#include "cost.hpp"
#include "siggers.hpp"
#include "solver.hpp"

namespace csplift {

// Unordered pairs {a,b}, a<b, ranked lexicographically; a set M is a bitmask over these ranks.
inline std::vector<std::pair<Element, Element>> unordered_pairs(std::size_t d) {
    std::vector<std::pair<Element, Element>> out;
    for (Element a = 0; a < d; ++a)
        for (Element b = a + 1; b < d; ++b) out.emplace_back(a, b);
    return out;
}

inline std::size_t pair_rank(std::size_t d, Element a, Element b) {
    if (a > b) std::swap(a, b);
    std::size_t r = 0;
    for (Element x = 0; x < a; ++x) r += d - 1 - x;
    return r + (b - a - 1);
}

using PairSet = std::uint32_t;

struct ConservativeElement {
    std::size_t domain_size = 0;
    PairSet m = 0;
    FiniteOperation join, meet;     // the STP
    FiniteOperation mj1, mj2, mn3;  // the MJN

    bool in_m(Element a, Element b) const { return (m >> pair_rank(domain_size, a, b)) & 1u; }

    friend bool operator==(const ConservativeElement& x, const ConservativeElement& y) {
        return x.domain_size == y.domain_size && x.m == y.m && x.join == y.join && x.meet == y.meet && x.mj1 == y.mj1 &&
               x.mj2 == y.mj2 && x.mn3 == y.mn3;
    }

    std::string describe() const {
        std::string s = "M={";
        bool first = true;
        for (auto [a, b] : unordered_pairs(domain_size))
            if (in_m(a, b)) {
                s += (first ? "" : ",") + std::string("{") + std::to_string(a) + "," + std::to_string(b) + "}";
                first = false;
            }
        s += "} join=";
        for (auto v : join.table()) s += std::to_string(v);
        s += " mjn=";
        for (std::size_t i = 0; i < mj1.table().size(); ++i)
            s += std::to_string(mj1.at(i)) + std::to_string(mj2.at(i)) + std::to_string(mn3.at(i)) + (i + 1 < mj1.table().size() ? "," : "");
        return s;
    }
};

struct StpMjnReport {
    bool valid = true;
    std::vector<std::string> problems;
};

namespace detail {
inline bool same_multiset(Element a, Element b, Element c, Element x, Element y, Element z) {
    std::array<Element, 3> p{a, b, c}, q{x, y, z};
    std::sort(p.begin(), p.end());
    std::sort(q.begin(), q.end());
    return p == q;
}
} // namespace detail

inline StpMjnReport validate_stp_mjn(const ConservativeElement& e) {
    StpMjnReport rep;
    const auto d = e.domain_size;
    auto fail = [&rep](std::string msg) {
        rep.valid = false;
        rep.problems.push_back(std::move(msg));
    };
    auto shape = [&](const FiniteOperation& f, std::size_t n, const char* what) {
        if (f.domain_size() != d || f.arity() != n) {
            fail(std::string(what) + " has the wrong domain or arity");
            return false;
        }
        return true;
    };
    bool ok = shape(e.join, 2, "join") & shape(e.meet, 2, "meet") & shape(e.mj1, 3, "Mj1") & shape(e.mj2, 3, "Mj2") &
              shape(e.mn3, 3, "Mn3");
    if (!ok) return rep;
    if (d < 32 && (e.m >> unordered_pairs(d).size()) != 0) fail("M contains an unknown pair");
    for (Element x = 0; x < d; ++x)
        for (Element y = 0; y < d; ++y) {
            auto j = e.join({x, y}), m = e.meet({x, y});
            if (!((j == x && m == y) || (j == y && m == x)))
                fail("pair not conservative at (" + std::to_string(x) + "," + std::to_string(y) + ")");
            if (x < y && e.in_m(x, y) && (j != e.join({y, x}) || m != e.meet({y, x})))
                fail("pair not commutative on {" + std::to_string(x) + "," + std::to_string(y) + "}");
        }
    for (Element x = 0; x < d; ++x)
        for (Element y = 0; y < d; ++y)
            for (Element z = 0; z < d; ++z) {
                auto a = e.mj1({x, y, z}), b = e.mj2({x, y, z}), c = e.mn3({x, y, z});
                auto at = "(" + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) + ")";
                if (!detail::same_multiset(a, b, c, x, y, z)) fail("triple is not a permutation of its arguments at " + at);
                bool two = (x == y) + (y == z) + (x == z) == 1;
                if (!two) continue;
                Element maj = (x == y || x == z) ? x : y;
                Element mino = x == y ? z : (x == z ? y : x);
                if (!e.in_m(maj, mino) && !(a == maj && b == maj && c == mino))
                    fail("majority/minority behavior fails at " + at);
            }
    return rep;
}

namespace detail {

inline std::uint64_t conservative_stp_count(std::size_t d, PairSet m) {
    std::uint64_t n = 1;
    for (auto [a, b] : unordered_pairs(d)) n *= ((m >> pair_rank(d, a, b)) & 1u) ? 2 : 4;
    return n;
}

// Output arrangements (Mj1,Mj2,Mn3) admissible at input (x,y,z), in lexicographic order.
inline std::vector<std::array<Element, 3>> mjn_choices(std::size_t d, PairSet m, Element x, Element y, Element z) {
    std::array<Element, 3> v{x, y, z};
    std::sort(v.begin(), v.end());
    std::vector<std::array<Element, 3>> out;
    bool two = (x == y) + (y == z) + (x == z) == 1;
    if (two) {
        Element maj = (x == y || x == z) ? x : y;
        Element mino = x == y ? z : (x == z ? y : x);
        if (!((m >> pair_rank(d, maj, mino)) & 1u)) return {{maj, maj, mino}};
    }
    do out.push_back(v);
    while (std::next_permutation(v.begin(), v.end()));
    return out;
}

inline std::uint64_t conservative_mjn_count(std::size_t d, PairSet m) {
    std::uint64_t n = 1;
    for (Element x = 0; x < d; ++x)
        for (Element y = 0; y < d; ++y)
            for (Element z = 0; z < d; ++z) n *= mjn_choices(d, m, x, y, z).size();
    return n;
}

// All STPs on M in lexicographic order of the join table.
inline std::vector<std::pair<FiniteOperation, FiniteOperation>> stps_on(std::size_t d, PairSet m) {
    auto pairs = unordered_pairs(d);
    std::vector<std::pair<Element, Element>> free;  // ordered off-diagonal positions with an independent choice
    for (Element x = 0; x < d; ++x)
        for (Element y = 0; y < d; ++y)
            if (x != y && (x < y || !((m >> pair_rank(d, x, y)) & 1u))) free.emplace_back(x, y);
    std::vector<std::pair<FiniteOperation, FiniteOperation>> out;
    // bit k of the choice picks the larger argument at free[k]; iterate so that join tables ascend
    std::vector<Element> pick(free.size(), 0);
    do {
        std::vector<Element> j(d * d), mt(d * d);
        for (Element x = 0; x < d; ++x) j[x * d + x] = mt[x * d + x] = x;
        for (std::size_t k = 0; k < free.size(); ++k) {
            auto [x, y] = free[k];
            Element lo = std::min(x, y), hi = std::max(x, y);
            Element jv = pick[k] ? hi : lo;
            j[x * d + y] = jv;
            mt[x * d + y] = jv == x ? y : x;
            if ((m >> pair_rank(d, x, y)) & 1u) {
                j[y * d + x] = jv;
                mt[y * d + x] = jv == x ? y : x;
            }
        }
        out.emplace_back(FiniteOperation("join", d, 2, j), FiniteOperation("meet", d, 2, mt));
    } while (!pick.empty() && next_tuple(pick, 2));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first.table() < b.first.table(); });
    return out;
}

inline std::vector<std::vector<std::array<Element, 3>>> mjn_positions(std::size_t d, PairSet m) {
    std::vector<std::vector<std::array<Element, 3>>> pos;
    for (Element x = 0; x < d; ++x)
        for (Element y = 0; y < d; ++y)
            for (Element z = 0; z < d; ++z) pos.push_back(mjn_choices(d, m, x, y, z));
    return pos;
}

inline ConservativeElement assemble(std::size_t d, PairSet m, const std::pair<FiniteOperation, FiniteOperation>& stp,
                                    const std::vector<std::vector<std::array<Element, 3>>>& pos, std::span<const std::size_t> pick) {
    std::vector<Element> a(pos.size()), b(pos.size()), c(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
        a[i] = pos[i][pick[i]][0];
        b[i] = pos[i][pick[i]][1];
        c[i] = pos[i][pick[i]][2];
    }
    return {d, m, stp.first, stp.second, FiniteOperation("Mj1", d, 3, a), FiniteOperation("Mj2", d, 3, b),
            FiniteOperation("Mn3", d, 3, c)};
}

inline void check_conservative_domain(std::size_t d) {
    if (d == 0 || d > 3) throw CapacityError("conservative elements are supported for 1 <= |D| <= 3");
}

} // namespace detail

inline std::uint64_t conservative_element_count(std::size_t d, PairSet m) {
    detail::check_conservative_domain(d);
    return detail::conservative_stp_count(d, m) * detail::conservative_mjn_count(d, m);
}

// Elements with the given M, ordered by (join table, MJN tables); stops when f returns false.
inline void for_each_conservative_element(std::size_t d, PairSet m, const std::function<bool(const ConservativeElement&)>& f,
                                          std::uint64_t limit = 10'000'000) {
    if (conservative_element_count(d, m) > limit)
        throw CapacityError("enumerate_conservative_elements: " + std::to_string(conservative_element_count(d, m)) +
                            " elements exceed " + std::to_string(limit));
    auto pos = detail::mjn_positions(d, m);
    std::vector<std::size_t> radix;
    for (const auto& p : pos) radix.push_back(p.size());
    for (const auto& stp : detail::stps_on(d, m)) {
        std::vector<std::size_t> pick(pos.size(), 0);
        do {
            if (!f(detail::assemble(d, m, stp, pos, pick))) return;
        } while (detail::next_digits(pick, radix));
    }
}

inline std::vector<ConservativeElement> enumerate_conservative_elements(std::size_t d, PairSet m,
                                                                        std::uint64_t limit = 10'000'000) {
    std::vector<ConservativeElement> out;
    for_each_conservative_element(d, m, [&](const ConservativeElement& e) {
        out.push_back(e);
        return true;
    }, limit);
    return out;
}

// The full D'_c, M descending by bitmask.
inline std::vector<ConservativeElement> enumerate_all_conservative_elements(std::size_t d, std::uint64_t limit = 10'000'000) {
    detail::check_conservative_domain(d);
    const PairSet n_m = PairSet{1} << unordered_pairs(d).size();
    std::uint64_t total = 0;
    for (PairSet m = 0; m < n_m; ++m) {
        total += conservative_element_count(d, m);
        if (total > limit) throw CapacityError("D'_c exceeds " + std::to_string(limit) + " elements");
    }
    std::vector<ConservativeElement> out;
    for (PairSet m = n_m; m-- > 0;) {
        auto part = enumerate_conservative_elements(d, m, limit);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

inline std::vector<WeightedOperation> stp_weights(const ConservativeElement& e) {
    return {{e.join, Rational(1, 2)}, {e.meet, Rational(1, 2)}};
}
inline std::vector<WeightedOperation> mjn_weights(const ConservativeElement& e) {
    return {{e.mj1, Rational(1, 3)}, {e.mj2, Rational(1, 3)}, {e.mn3, Rational(1, 3)}};
}

// Returns the first element (M descending, then enumeration order) whose STP and MJN are multimorphisms of every function.
// The STP and MJN conditions are independent, so they are searched separately per M.
inline std::optional<ConservativeElement> find_kz_multimorphisms(const ValuedTemplate& gamma) {
    const auto d = gamma.domain_size;
    detail::check_conservative_domain(d);
    for (const auto& f : gamma.functions)
        if (f.domain_size() != d) throw SignatureError("find_kz_multimorphisms: function domain mismatch");
    const PairSet n_m = PairSet{1} << unordered_pairs(d).size();

    struct Ineq {
        std::vector<std::size_t> positions;  // MJN input index per coordinate
        CostValue rhs;
        const CostFunction* f;
    };

    for (PairSet m = n_m; m-- > 0;) {
        std::optional<std::pair<FiniteOperation, FiniteOperation>> stp;
        for (const auto& cand : detail::stps_on(d, m)) {
            ConservativeElement probe{d, m, cand.first, cand.second, {}, {}, {}};
            bool ok = true;
            for (const auto& f : gamma.functions)
                if (!is_multimorphism(stp_weights(probe), f)) {
                    ok = false;
                    break;
                }
            if (ok) {
                stp = cand;
                break;
            }
        }
        if (!stp) continue;

        auto pos = detail::mjn_positions(d, m);
        // Each inequality is checked once the largest position it reads has been assigned.
        std::vector<std::vector<Ineq>> due(pos.size());
        for (const auto& f : gamma.functions) {
            auto dom = f.dom();
            const auto p = f.arity();
            if (dom.empty() || p == 0) continue;
            std::vector<std::size_t> pick(3, 0), radix(3, dom.size());
            do {
                Ineq q{{}, CostValue(0), &f};
                std::size_t last = 0;
                for (std::size_t j = 0; j < p; ++j) {
                    std::size_t idx = (dom[pick[0]][j] * d + dom[pick[1]][j]) * d + dom[pick[2]][j];
                    q.positions.push_back(idx);
                    last = std::max(last, idx);
                }
                for (int i = 0; i < 3; ++i) q.rhs = q.rhs + f(dom[pick[i]]);
                due[last].push_back(std::move(q));
            } while (detail::next_digits(pick, radix));
        }
        std::vector<std::size_t> choice(pos.size(), 0);
        Tuple y0, y1, y2;
        auto holds = [&](const Ineq& q) {
            const auto p = q.positions.size();
            y0.resize(p), y1.resize(p), y2.resize(p);
            for (std::size_t j = 0; j < p; ++j) {
                const auto& out = pos[q.positions[j]][choice[q.positions[j]]];
                y0[j] = out[0], y1[j] = out[1], y2[j] = out[2];
            }
            auto lhs = (*q.f)(y0) + (*q.f)(y1) + (*q.f)(y2);
            return lhs.is_finite() && lhs <= q.rhs;
        };
        std::function<bool(std::size_t)> dfs = [&](std::size_t k) {
            if (k == pos.size()) return true;
            for (std::size_t c = 0; c < pos[k].size(); ++c) {
                choice[k] = c;
                bool ok = true;
                for (const auto& q : due[k])
                    if (!holds(q)) {
                        ok = false;
                        break;
                    }
                if (ok && dfs(k + 1)) return true;
            }
            return false;
        };
        if (dfs(0)) return detail::assemble(d, m, *stp, pos, choice);
    }
    return std::nullopt;
}

// Componentwise STP and MJN inequalities over all of D^p; an infinite right-hand side admits anything.
inline bool gamma_prime_c_membership(const CostFunction& f, std::span<const ConservativeElement* const> elems) {
    const auto p = f.arity();
    if (elems.size() != p) throw SignatureError("gamma_prime_c_membership: element count differs from arity");
    auto dom = f.dom();
    if (dom.empty()) return true;
    Tuple u(p), w(p), t(p);
    for (const auto& x : dom)
        for (const auto& y : dom) {
            for (std::size_t j = 0; j < p; ++j) {
                u[j] = elems[j]->join({x[j], y[j]});
                w[j] = elems[j]->meet({x[j], y[j]});
            }
            if (f(u) + f(w) > f(x) + f(y)) return false;
        }
    for (const auto& x : dom)
        for (const auto& y : dom)
            for (const auto& z : dom) {
                for (std::size_t j = 0; j < p; ++j) {
                    std::array<Element, 3> a{x[j], y[j], z[j]};
                    u[j] = elems[j]->mj1(a);
                    w[j] = elems[j]->mj2(a);
                    t[j] = elems[j]->mn3(a);
                }
                if (f(u) + f(w) + f(t) > f(x) + f(y) + f(z)) return false;
            }
    return true;
}

inline bool gamma_prime_c_membership(const CostFunction& f, std::span<const ConservativeElement> elems) {
    std::vector<const ConservativeElement*> p;
    for (const auto& e : elems) p.push_back(&e);
    return gamma_prime_c_membership(f, std::span<const ConservativeElement* const>(p));
}

struct GammaPrimeC {
    std::shared_ptr<const std::vector<ConservativeElement>> elements;
    RelationalStructure structure;  // lazy relations named f.name()+"'"
};

inline GammaPrimeC build_gamma_prime_c(const ValuedTemplate& gamma, std::uint64_t limit = 10'000'000) {
    GammaPrimeC g;
    g.elements = std::make_shared<const std::vector<ConservativeElement>>(enumerate_all_conservative_elements(gamma.domain_size, limit));
    g.structure.name = gamma.name + "'c";
    g.structure.domain_size = g.elements->size();
    for (const auto& f : gamma.functions) {
        if (f.domain_size() != gamma.domain_size) throw SignatureError("build_gamma_prime_c: function domain mismatch");
        auto pred = [f, els = g.elements](std::span<const Element> t) {
            std::vector<const ConservativeElement*> p;
            for (auto i : t) p.push_back(&(*els)[i]);
            return gamma_prime_c_membership(f, std::span<const ConservativeElement* const>(p));
        };
        g.structure.relations.push_back(Relation::lazy(f.name() + "'", f.arity(), g.elements->size(), pred));
    }
    return g;
}

// f(x,y) = inf iff x=y=1, together with the four 0/1-valued unary functions.
inline ValuedTemplate independent_set_template() {
    ValuedTemplate t{"indset", 2, {}};
    CostFunction f("f", 2, 2);
    f.set({0, 0}, 0);
    f.set({0, 1}, 0);
    f.set({1, 0}, 0);
    t.functions.push_back(f);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            CostFunction u("u" + std::to_string(a) + std::to_string(b), 2, 1);
            u.set({0}, a);
            u.set({1}, b);
            t.functions.push_back(u);
        }
    return t;
}

// ({0,1}, !=, full unary relations) in the independent-set signature.
inline RelationalStructure disequality_template() {
    RelationalStructure s{"neq", 2, {}};
    s.relations.emplace_back("f", 2, std::vector<Tuple>{{0, 1}, {1, 0}});
    for (int k = 0; k < 4; ++k) {
        static const char* names[] = {"u00", "u01", "u10", "u11"};
        s.relations.emplace_back(names[k], 1, std::vector<Tuple>{{0}, {1}});
    }
    return s;
}

// Graph on n vertices in the independent-set signature; edges are added in both directions.
inline RelationalStructure graph_instance(std::size_t n, std::span<const std::pair<Element, Element>> edges,
                                          std::string name = "G") {
    std::vector<Tuple> e;
    for (auto [a, b] : edges) {
        e.push_back({a, b});
        e.push_back({b, a});
    }
    RelationalStructure s{std::move(name), n, {}};
    s.relations.emplace_back("f", 2, std::move(e));
    for (const char* u : {"u00", "u01", "u10", "u11"}) s.relations.emplace_back(u, 1, std::vector<Tuple>{});
    return s;
}

inline bool is_bipartite(std::size_t n, const Relation& edges) {
    std::vector<std::vector<Element>> adj(n);
    for (const auto& t : edges.tuples()) {
        if (t[0] == t[1]) return false;
        adj[t[0]].push_back(t[1]);
        adj[t[1]].push_back(t[0]);
    }
    std::vector<int> color(n, -1);
    for (std::size_t s = 0; s < n; ++s) {
        if (color[s] >= 0) continue;
        color[s] = 0;
        std::deque<std::size_t> q{s};
        while (!q.empty()) {
            auto v = q.front();
            q.pop_front();
            for (auto w : adj[v]) {
                if (color[w] < 0) {
                    color[w] = 1 - color[v];
                    q.push_back(w);
                } else if (color[w] == color[v]) {
                    return false;
                }
            }
        }
    }
    return true;
}

struct BipartiteVerdict {
    bool hom_found = false;
    bool bipartite = false;
    bool agree = false;
    std::optional<Map> hom;
};

inline const GammaPrimeC& independent_set_gamma_prime_c() {
    static const GammaPrimeC g = build_gamma_prime_c(independent_set_template());
    return g;
}

inline BipartiteVerdict bipartite_example_check(const RelationalStructure& r, SearchOptions opts = lazy_search_options()) {
    const auto& gc = independent_set_gamma_prime_c();
    if (r.arities() != gc.structure.arities()) throw SignatureError("bipartite_example_check: input is not in the template signature");
    BipartiteVerdict v;
    v.hom = find_homomorphism(r, gc.structure, opts);
    v.hom_found = v.hom.has_value();
    v.bipartite = is_bipartite(r.domain_size, r.relations[0]);
    v.agree = v.hom_found == v.bipartite;
    return v;
}

} // namespace csplift
