#pragma once

#include <map>
#include <set>
#include <variant>

#include "lifted.hpp"
#include "operations.hpp"
#include "siggers.hpp"

namespace csplift {

struct Algebra {
    std::string name;
    std::vector<std::size_t> signature;
    std::size_t domain_size = 0;
    std::vector<FiniteOperation> ops;

    void validate() const {
        if (signature.empty()) throw SignatureError("algebra '" + name + "': empty signature");
        if (ops.size() != signature.size()) throw SignatureError("algebra '" + name + "': operation count mismatch");
        for (std::size_t i = 0; i < ops.size(); ++i)
            if (ops[i].arity() != signature[i] || ops[i].domain_size() != domain_size)
                throw SignatureError("algebra '" + name + "': operation " + std::to_string(i) + " does not match the signature");
    }

    // Canonical byte sequence: domain, then arity and table of each operation.
    std::string fingerprint() const {
        std::string f;
        auto put = [&f](std::uint64_t x) {
            for (int k = 0; k < 4; ++k) f.push_back(static_cast<char>((x >> (8 * k)) & 0xff));
        };
        put(domain_size);
        put(ops.size());
        for (const auto& o : ops) {
            put(o.arity());
            for (auto v : o.table()) put(v);
        }
        return f;
    }

    friend bool operator==(const Algebra& a, const Algebra& b) {
        return a.domain_size == b.domain_size && a.signature == b.signature && a.ops == b.ops;
    }
};

class AlgebraSet {
public:
    AlgebraSet() = default;
    AlgebraSet(std::vector<std::size_t> signature, std::size_t domain_size)
        : signature_(std::move(signature)), domain_size_(domain_size) {}

    // Returns false (and ignores the algebra) when its fingerprint is already present.
    bool add(Algebra a) {
        a.validate();
        if (a.signature != signature_ || a.domain_size != domain_size_)
            throw SignatureError("algebra '" + a.name + "' does not match the set's signature or domain");
        auto fp = a.fingerprint();
        if (index_.count(fp)) return false;
        index_.emplace(std::move(fp), members_.size());
        members_.push_back(std::move(a));
        return true;
    }

    std::optional<std::size_t> index_of(const Algebra& a) const {
        auto it = index_.find(a.fingerprint());
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    bool contains(const Algebra& a) const { return index_of(a).has_value(); }

    const std::vector<std::size_t>& signature() const { return signature_; }
    std::size_t domain_size() const { return domain_size_; }
    std::size_t size() const { return members_.size(); }
    const Algebra& operator[](std::size_t i) const { return members_[i]; }
    const std::vector<Algebra>& members() const { return members_; }

private:
    std::vector<std::size_t> signature_;
    std::size_t domain_size_ = 0;
    std::vector<Algebra> members_;
    std::map<std::string, std::size_t> index_;
};

inline Algebra constant_algebra(Element a, const std::vector<std::size_t>& signature, std::size_t d) {
    if (a >= d) throw PreconditionError("constant_algebra: element out of range");
    Algebra alg{"const" + std::to_string(a), signature, d, {}};
    for (auto n : signature) alg.ops.push_back(FiniteOperation::constant(d, n, a));
    return alg;
}

inline bool is_extending(const AlgebraSet& b) {
    for (Element a = 0; a < b.domain_size(); ++a)
        if (!b.contains(constant_algebra(a, b.signature(), b.domain_size()))) return false;
    return true;
}

// Every algebra of the signature over [0,d) accepted by keep, in table order.
template <class Pred>
AlgebraSet all_algebras(const std::vector<std::size_t>& signature, std::size_t d, Pred keep, std::uint64_t limit = 100'000) {
    std::vector<std::uint64_t> sizes;
    std::uint64_t total_entries = 0;
    for (auto n : signature) {
        sizes.push_back(detail::pow_or_throw(d, n, "algebra table"));
        total_entries += sizes.back();
    }
    auto count = detail::checked_pow(d, total_entries);
    if (!count || *count > limit) throw CapacityError("all_algebras: too many algebras to enumerate");
    AlgebraSet set(signature, d);
    std::vector<Element> flat(total_entries, 0);
    std::size_t k = 0;
    do {
        Algebra a{"A" + std::to_string(k++), signature, d, {}};
        std::size_t off = 0;
        for (std::size_t i = 0; i < signature.size(); ++i) {
            a.ops.emplace_back("o" + std::to_string(i), d, signature[i],
                               std::vector<Element>(flat.begin() + off, flat.begin() + off + sizes[i]));
            off += sizes[i];
        }
        if (keep(a)) set.add(std::move(a));
    } while (!flat.empty() && detail::next_tuple(flat, static_cast<Element>(d)));
    return set;
}

inline bool rho_B_membership(const Relation& rho, std::span<const Algebra* const> algebras) {
    if (algebras.size() != rho.arity()) throw SignatureError("rho_B_membership: algebra count differs from relation arity");
    if (algebras.empty()) return true;
    std::vector<FiniteOperation> ops(algebras.size());
    for (std::size_t i = 0; i < algebras[0]->signature.size(); ++i) {
        for (std::size_t j = 0; j < algebras.size(); ++j) ops[j] = algebras[j]->ops[i];
        if (!componentwise_preserves(ops, rho)) return false;
    }
    return true;
}

inline bool rho_B_membership(const Relation& rho, std::span<const Algebra> algebras) {
    std::vector<const Algebra*> p;
    for (const auto& a : algebras) p.push_back(&a);
    return rho_B_membership(rho, std::span<const Algebra* const>(p));
}

inline RelationalStructure build_gamma_B(const RelationalStructure& gamma, const AlgebraSet& b,
                                         std::uint64_t capacity = 1'000'000) {
    if (b.domain_size() != gamma.domain_size) throw SignatureError("build_gamma_B: domain mismatch");
    RelationalStructure out;
    out.name = gamma.name + "^B";
    out.domain_size = b.size();
    auto members = std::make_shared<std::vector<Algebra>>(b.members());
    for (const auto& rho : gamma.relations) {
        const auto m = rho.arity();
        auto space = detail::checked_pow(b.size(), m);
        if (!space || *space > capacity) {
            auto pred = [rho, members](std::span<const Element> t) {
                std::vector<const Algebra*> p;
                for (auto x : t) p.push_back(&(*members)[x]);
                return rho_B_membership(rho, std::span<const Algebra* const>(p));
            };
            out.relations.push_back(Relation::lazy(rho.name(), m, b.size(), pred));
            continue;
        }
        std::vector<Tuple> tuples;
        Tuple t(m, 0);
        std::vector<const Algebra*> p(m);
        if (b.size() > 0 || m == 0) do {
                for (std::size_t j = 0; j < m; ++j) p[j] = &(*members)[t[j]];
                if (rho_B_membership(rho, std::span<const Algebra* const>(p))) tuples.push_back(t);
            } while (m > 0 && detail::next_tuple(t, static_cast<Element>(b.size())));
        out.relations.emplace_back(rho.name(), m, std::move(tuples));
    }
    return out;
}

inline Map extending_embedding(const RelationalStructure& gamma, const AlgebraSet& b) {
    Map h;
    for (Element a = 0; a < gamma.domain_size; ++a) {
        auto i = b.index_of(constant_algebra(a, b.signature(), b.domain_size()));
        if (!i) throw PreconditionError("extending_embedding: the set lacks the constant algebra for " + std::to_string(a));
        h.push_back(static_cast<Element>(*i));
    }
    return h;
}

// ---- tractability ----

enum class Verdict { tractable, unknown };

inline const char* to_string(Verdict v) { return v == Verdict::tractable ? "tractable" : "unknown"; }

using TractabilityOracle = std::function<Verdict(const Algebra&)>;

// Boolean domain only; algebras with nullary symbols are reported unknown.
inline TractabilityOracle boolean_schaefer_oracle() {
    return [](const Algebra& a) {
        if (a.domain_size != 2) return Verdict::unknown;
        for (auto n : a.signature)
            if (n == 0) return Verdict::unknown;
        return boolean_algebra_tractable(a.ops) ? Verdict::tractable : Verdict::unknown;
    };
}

inline TractabilityOracle user_asserted_oracle(std::set<std::string> fingerprints) {
    return [fps = std::move(fingerprints)](const Algebra& a) {
        return fps.count(a.fingerprint()) ? Verdict::tractable : Verdict::unknown;
    };
}

struct TractableSetVerdict {
    Verdict overall = Verdict::unknown;
    std::vector<Verdict> members;
};

inline TractableSetVerdict is_tractable_set(const AlgebraSet& b, const TractabilityOracle& oracle) {
    TractableSetVerdict v;
    v.overall = Verdict::tractable;
    for (const auto& a : b.members()) {
        Verdict m = Verdict::unknown;
        try {
            m = oracle(a);
        } catch (const UnsupportedError&) {
        }
        v.members.push_back(m);
        if (m != Verdict::tractable) v.overall = Verdict::unknown;
    }
    return v;
}

// Domain D^|B|, tuples ranked with the first algebra most significant.
inline Algebra product_algebra(const AlgebraSet& b, std::uint64_t limit = 10'000) {
    const auto d = b.domain_size();
    const auto k = b.size();
    auto dom = detail::checked_pow(d, k);
    if (!dom || *dom > limit) throw CapacityError("product_algebra: domain exceeds " + std::to_string(limit));
    Algebra c{"product", b.signature(), *dom, {}};
    Tuple coords(k), args;
    for (std::size_t i = 0; i < b.signature().size(); ++i) {
        const auto n = b.signature()[i];
        auto rows = detail::checked_pow(*dom, n);
        if (!rows || *rows > 10 * limit * limit) throw CapacityError("product_algebra: operation table too large");
        c.ops.push_back(FiniteOperation::from_function("o" + std::to_string(i), *dom, n, [&](std::span<const Element> x) {
            std::vector<Tuple> parts(n, Tuple(k));
            for (std::size_t j = 0; j < n; ++j) detail::decode(x[j], d, parts[j]);
            args.resize(n);
            for (std::size_t a = 0; a < k; ++a) {
                for (std::size_t j = 0; j < n; ++j) args[j] = parts[j][a];
                coords[a] = b[a].ops[i](args);
            }
            return static_cast<Element>(detail::encode(coords, d));
        }));
    }
    return c;
}

// ---- outside and inside polymorphisms ----

// o_i(x) = f(o_i^{A_1}(x), ..., o_i^{A_n}(x)).
inline Algebra outside_apply(const FiniteOperation& f, std::span<const Algebra* const> algebras) {
    if (algebras.size() != f.arity()) throw SignatureError("outside_apply: need " + std::to_string(f.arity()) + " algebras");
    if (algebras.empty()) throw PreconditionError("outside_apply: nullary f has no algebra arguments");
    const auto& sig = algebras[0]->signature;
    const auto d = algebras[0]->domain_size;
    if (f.domain_size() != d) throw SignatureError("outside_apply: domain mismatch");
    Algebra out{f.name() + "(...)", sig, d, {}};
    Tuple vals(f.arity());
    for (std::size_t i = 0; i < sig.size(); ++i) {
        const auto rows = algebras[0]->ops[i].table().size();
        std::vector<Element> t(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = algebras[j]->ops[i].at(r);
            t[r] = f(vals);
        }
        out.ops.emplace_back("o" + std::to_string(i), d, sig[i], std::move(t));
    }
    return out;
}

inline Algebra outside_apply(const FiniteOperation& f, std::span<const Algebra> algebras) {
    std::vector<const Algebra*> p;
    for (const auto& a : algebras) p.push_back(&a);
    return outside_apply(f, std::span<const Algebra* const>(p));
}

inline bool outside_preserves(const FiniteOperation& f, const AlgebraSet& b, std::uint64_t limit = 10'000'000) {
    const auto n = f.arity();
    auto space = detail::checked_pow(b.size(), n);
    if (!space || *space > limit) throw CapacityError("outside_preserves: too many input tuples");
    if (b.size() == 0) return true;
    Tuple pick(n, 0);
    std::vector<const Algebra*> args(n);
    do {
        for (std::size_t j = 0; j < n; ++j) args[j] = &b[pick[j]];
        if (!b.contains(outside_apply(f, std::span<const Algebra* const>(args)))) return false;
    } while (detail::next_tuple(pick, static_cast<Element>(b.size())));
    return true;
}

// o^B_i(x) = o^A_i(f^i_1(x), ..., f^i_{n_i}(x)).
inline Algebra inside_apply(const OperationSystem& fbar, const Algebra& a) {
    fbar.validate();
    if (fbar.arities != a.signature) throw SignatureError("inside_apply: system does not match the signature");
    Algebra out{"inside(" + a.name + ")", a.signature, a.domain_size, {}};
    for (std::size_t i = 0; i < a.signature.size(); ++i) {
        const auto n = a.signature[i];
        if (n == 0) {
            out.ops.push_back(a.ops[i]);
            continue;
        }
        Tuple inner(n);
        out.ops.push_back(FiniteOperation::from_function("o" + std::to_string(i), a.domain_size, n, [&](std::span<const Element> x) {
            for (std::size_t j = 0; j < n; ++j) inner[j] = fbar.ops[i][j](x);
            return a.ops[i](inner);
        }));
    }
    return out;
}

inline bool inside_preserves(const OperationSystem& fbar, const AlgebraSet& b) {
    for (const auto& a : b.members())
        if (!b.contains(inside_apply(fbar, a))) return false;
    return true;
}

enum class AuditStatus { passed, violated, skipped };

inline const char* to_string(AuditStatus s) {
    switch (s) {
    case AuditStatus::passed: return "passed";
    case AuditStatus::violated: return "violated";
    default: return "skipped";
    }
}

struct AuditOutcome {
    AuditStatus status = AuditStatus::skipped;
    std::string reason;
};

namespace detail {
inline AuditOutcome check_induced(const FiniteOperation& induced, const RelationalStructure& gb) {
    for (const auto& rel : gb.relations) {
        if (rel.is_lazy()) return {AuditStatus::skipped, "relation " + rel.name() + " of Gamma^B is not materialized"};
        if (!preserves_relation(induced, rel))
            return {AuditStatus::violated, "induced operation does not preserve " + rel.name() + " of Gamma^B"};
    }
    return {AuditStatus::passed, ""};
}
} // namespace detail

// The operation induced on B-indices by f; requires outside_preserves(f, b).
inline FiniteOperation lifted_outside_operation(const FiniteOperation& f, const AlgebraSet& b) {
    std::vector<const Algebra*> args(f.arity());
    return FiniteOperation::from_function(f.name() + "^A", b.size(), f.arity(), [&](std::span<const Element> x) {
        for (std::size_t j = 0; j < x.size(); ++j) args[j] = &b[x[j]];
        auto idx = b.index_of(outside_apply(f, std::span<const Algebra* const>(args)));
        if (!idx) throw PreconditionError("lifted_outside_operation: f^A leaves the set");
        return static_cast<Element>(*idx);
    });
}

inline AuditOutcome verify_outside_polymorphism(const FiniteOperation& f, const RelationalStructure& gamma, const AlgebraSet& b) {
    if (!is_polymorphism(f, gamma)) return {AuditStatus::skipped, "f is not a polymorphism of the template"};
    if (!outside_preserves(f, b)) return {AuditStatus::skipped, "f^A does not preserve the algebra set"};
    return detail::check_induced(lifted_outside_operation(f, b), build_gamma_B(gamma, b));
}

inline AuditOutcome verify_inside_polymorphism(const OperationSystem& fbar, const RelationalStructure& gamma, const AlgebraSet& b) {
    fbar.validate();
    for (const auto& layer : fbar.ops)
        for (const auto& f : layer)
            if (!is_polymorphism(f, gamma)) return {AuditStatus::skipped, "some f^i_j is not a polymorphism of the template"};
    if (!inside_preserves(fbar, b)) return {AuditStatus::skipped, "a_f does not preserve the algebra set"};
    auto induced = FiniteOperation::from_function("a_f", b.size(), 1, [&](std::span<const Element> x) {
        return static_cast<Element>(*b.index_of(inside_apply(fbar, b[x[0]])));
    });
    return detail::check_induced(induced, build_gamma_B(gamma, b));
}

// ---- transport of functional identities ----

namespace transport {
// g(x1..x_{n-1}) = f(x1..x_{n-1}, x_{n-1})
struct Identification {
    FiniteOperation f, g;
};
// f(x1..xn) = g(x1..x_{n-1})
struct Fictitious {
    FiniteOperation f, g;
};
// g(x1..xn) = f(x_pi(1), ..., x_pi(n))
struct Permutation {
    FiniteOperation f, g;
    std::vector<std::size_t> pi;
};
// p_i(x1..xn) = x_i
struct Projection {
    std::size_t n = 1, i = 0;
    std::size_t domain_size = 2;
};
// g(x) = f(g1(x), ..., gn(x))
struct Superposition {
    FiniteOperation g, f;
    std::vector<FiniteOperation> parts;
};
using Case = std::variant<Identification, Fictitious, Permutation, Projection, Superposition>;

inline const char* name_of(const Case& c) {
    static const char* names[] = {"identification", "fictitious", "permutation", "projection", "superposition"};
    return names[c.index()];
}
} // namespace transport

namespace detail {
template <class F>
bool all_args(std::size_t d, std::size_t n, F&& f) {
    Tuple x(n, 0);
    do {
        if (!f(std::span<const Element>(x))) return false;
    } while (n > 0 && next_tuple(x, static_cast<Element>(d)));
    return true;
}

inline std::vector<const Algebra*> ptrs(std::span<const Algebra> as) {
    std::vector<const Algebra*> p;
    for (const auto& a : as) p.push_back(&a);
    return p;
}
} // namespace detail

// algebras supplies the lifted arguments A_1..A_k (k = the identity's variable count).
inline bool term_transport_check(const transport::Case& c, std::span<const Algebra> algebras) {
    using namespace transport;
    if (const auto* k = std::get_if<Identification>(&c)) {
        const auto n = k->f.arity();
        if (n < 2 || k->g.arity() != n - 1) throw PreconditionError("identification: arity mismatch");
        bool base = detail::all_args(k->f.domain_size(), n - 1, [&](auto x) {
            Tuple y(x.begin(), x.end());
            y.push_back(x[n - 2]);
            return k->g(x) == k->f(y);
        });
        if (!base) throw PreconditionError("identification: base identity does not hold");
        if (algebras.size() != n - 1) throw PreconditionError("identification: need n-1 algebras");
        auto p = detail::ptrs(algebras);
        auto q = p;
        q.push_back(p.back());
        return outside_apply(k->g, std::span<const Algebra* const>(p)) == outside_apply(k->f, std::span<const Algebra* const>(q));
    }
    if (const auto* k = std::get_if<Fictitious>(&c)) {
        const auto n = k->f.arity();
        if (n < 2 || k->g.arity() != n - 1) throw PreconditionError("fictitious: arity mismatch");
        bool base = detail::all_args(k->f.domain_size(), n, [&](auto x) { return k->f(x) == k->g(x.first(n - 1)); });
        if (!base) throw PreconditionError("fictitious: base identity does not hold");
        if (algebras.size() != n) throw PreconditionError("fictitious: need n algebras");
        auto p = detail::ptrs(algebras);
        std::vector<const Algebra*> q(p.begin(), p.end() - 1);
        return outside_apply(k->f, std::span<const Algebra* const>(p)) == outside_apply(k->g, std::span<const Algebra* const>(q));
    }
    if (const auto* k = std::get_if<Permutation>(&c)) {
        const auto n = k->f.arity();
        if (k->g.arity() != n || k->pi.size() != n) throw PreconditionError("permutation: arity mismatch");
        auto sorted = k->pi;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < n; ++i)
            if (sorted[i] != i) throw PreconditionError("permutation: pi is not a permutation");
        bool base = detail::all_args(k->f.domain_size(), n, [&](auto x) {
            Tuple y(n);
            for (std::size_t i = 0; i < n; ++i) y[i] = x[k->pi[i]];
            return k->g(x) == k->f(y);
        });
        if (!base) throw PreconditionError("permutation: base identity does not hold");
        if (algebras.size() != n) throw PreconditionError("permutation: need n algebras");
        auto p = detail::ptrs(algebras);
        std::vector<const Algebra*> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = p[k->pi[i]];
        return outside_apply(k->g, std::span<const Algebra* const>(p)) == outside_apply(k->f, std::span<const Algebra* const>(q));
    }
    if (const auto* k = std::get_if<Projection>(&c)) {
        if (k->i >= k->n || algebras.size() != k->n) throw PreconditionError("projection: bad index or algebra count");
        auto proj = FiniteOperation::projection(k->domain_size, k->n, k->i);
        return outside_apply(proj, algebras) == algebras[k->i];
    }
    const auto& k = std::get<Superposition>(c);
    const auto m = k.g.arity();
    if (k.parts.size() != k.f.arity()) throw PreconditionError("superposition: need one inner operation per argument of f");
    for (const auto& gi : k.parts)
        if (gi.arity() != m) throw PreconditionError("superposition: inner operations must share g's arity");
    bool base = detail::all_args(k.g.domain_size(), m, [&](auto x) {
        Tuple y(k.parts.size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = k.parts[i](x);
        return k.g(x) == k.f(y);
    });
    if (!base) throw PreconditionError("superposition: base identity does not hold");
    if (algebras.size() != m) throw PreconditionError("superposition: need m algebras");
    std::vector<Algebra> inner;
    for (const auto& gi : k.parts) inner.push_back(outside_apply(gi, algebras));
    return outside_apply(k.g, algebras) == outside_apply(k.f, inner);
}

// Terms over a list of operation symbols.
struct Term {
    static constexpr std::size_t variable = std::numeric_limits<std::size_t>::max();
    std::size_t op = variable;
    std::size_t var = 0;
    std::vector<Term> args;

    static Term x(std::size_t i) { return Term{variable, i, {}}; }
    static Term apply(std::size_t op, std::vector<Term> args) { return Term{op, 0, std::move(args)}; }
};

inline Element evaluate_term(const Term& t, std::span<const FiniteOperation> ops, std::span<const Element> env) {
    if (t.op == Term::variable) return env[t.var];
    Tuple a;
    for (const auto& s : t.args) a.push_back(evaluate_term(s, ops, env));
    return ops[t.op](a);
}

inline Algebra evaluate_lifted_term(const Term& t, std::span<const FiniteOperation> ops, std::span<const Algebra> env) {
    if (t.op == Term::variable) return env[t.var];
    std::vector<Algebra> a;
    for (const auto& s : t.args) a.push_back(evaluate_lifted_term(s, ops, env));
    return outside_apply(ops[t.op], a);
}

inline bool identity_holds(std::span<const FiniteOperation> ops, const Term& lhs, const Term& rhs, std::size_t nvars,
                           std::size_t d) {
    return detail::all_args(d, nvars, [&](auto x) { return evaluate_term(lhs, ops, x) == evaluate_term(rhs, ops, x); });
}

// Checks lhs = rhs for the lifted operations on every assignment of the given algebras.
inline bool identity_transports(std::span<const FiniteOperation> ops, const Term& lhs, const Term& rhs, std::size_t nvars,
                                std::span<const Algebra> pool) {
    if (pool.empty()) return true;
    std::vector<std::size_t> pick(nvars, 0), radix(nvars, pool.size());
    std::vector<Algebra> env(nvars);
    do {
        for (std::size_t i = 0; i < nvars; ++i) env[i] = pool[pick[i]];
        if (!(evaluate_lifted_term(lhs, ops, env) == evaluate_lifted_term(rhs, ops, env))) return false;
    } while (detail::next_digits(pick, radix));
    return true;
}

struct SiggersTransport {
    std::optional<SiggersPair> witness;  // over B-indices
    bool confirmed = false;              // Siggers pair and preserves Gamma^B
    std::string reason;
};

inline SiggersTransport siggers_transport(const RelationalStructure& gamma, const SiggersPair& pair, const AlgebraSet& b) {
    SiggersTransport out;
    if (!is_siggers_pair(pair.g, pair.s) || !is_polymorphism(pair.g, gamma) || !is_polymorphism(pair.s, gamma)) {
        out.reason = "pair is not admitted by the template";
        return out;
    }
    if (!outside_preserves(pair.g, b)) {
        out.reason = "g^A does not preserve the algebra set";
        return out;
    }
    if (!outside_preserves(pair.s, b)) {
        out.reason = "s^A does not preserve the algebra set";
        return out;
    }
    SiggersPair w{lifted_outside_operation(pair.g, b), lifted_outside_operation(pair.s, b)};
    auto gb = build_gamma_B(gamma, b);
    out.confirmed = is_siggers_pair(w.g, w.s) && is_polymorphism(w.g, gb) && is_polymorphism(w.s, gb);
    if (!out.confirmed) out.reason = "lifted pair fails the Siggers-pair or preservation check";
    out.witness = std::move(w);
    return out;
}

struct MInvResult {
    bool passed = true;
    std::string failure;
};

inline MInvResult lifted_in_minv_check(const RelationalStructure& gamma, const AlgebraSet& b) {
    auto gb = build_gamma_B(gamma, b);
    for (const auto& r : gb.relations)
        if (r.is_lazy()) throw CapacityError("lifted_in_minv_check: Gamma^B is too large to materialize");
    auto l = lift_language(gamma, gb);
    MInvResult res;
    std::vector<FiniteOperation> per_sort(b.size());
    for (std::size_t j = 0; j < l.info.size(); ++j) {
        auto ms = multisorted_view(l, j);
        for (std::size_t h = 0; h < b.signature().size(); ++h) {
            for (std::size_t s = 0; s < b.size(); ++s) per_sort[s] = b[s].ops[h];
            if (!multisorted_polymorphism_check(per_sort, ms)) {
                res.passed = false;
                res.failure = "symbol " + std::to_string(h) + " fails on " + ms.name;
                return res;
            }
        }
    }
    return res;
}

struct PipelineResult {
    bool member = false;
    int decided_at_step = 0;
    std::optional<Map> h;                  // R -> Gamma^B
    MultiSortedInstance instance;          // step 2
    std::vector<std::size_t> sort_sizes;
    std::optional<Map> assignment;         // step 3 solution, equally a homomorphism R -> Gamma
    TractableSetVerdict tractability;
    bool direct_member = false;
    bool agrees_with_direct = false;
};

inline PipelineResult reduction_pipeline(const RelationalStructure& gamma, const AlgebraSet& b, const RelationalStructure& r,
                                         const TractabilityOracle& oracle = boolean_schaefer_oracle(), SearchOptions opts = {}) {
    if (!is_extending(b)) throw PreconditionError("reduction_pipeline: the algebra set is not extending");
    PipelineResult res;
    res.tractability = is_tractable_set(b, oracle);
    res.direct_member = find_homomorphism(r, gamma, opts).has_value();
    auto gb = build_gamma_B(gamma, b);
    res.h = find_homomorphism(r, gb, opts);
    if (!res.h) {
        res.decided_at_step = 1;
        res.member = false;
        res.agrees_with_direct = res.member == res.direct_member;
        return res;
    }
    auto& inst = res.instance;
    inst.variable_count = r.domain_size;
    inst.delta.assign(res.h->begin(), res.h->end());
    res.sort_sizes.assign(b.size(), gamma.domain_size);
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t> made;
    for (std::size_t i = 0; i < r.relations.size(); ++i)
        for (const auto& t : r.relations[i].tuples()) {
            std::vector<std::size_t> sig;
            for (auto v : t) sig.push_back((*res.h)[v]);
            auto key = std::make_pair(i, sig);
            auto it = made.find(key);
            if (it == made.end()) {
                MultiSortedRelation rel;
                rel.name = gamma.relations[i].name() + "^(";
                for (std::size_t k = 0; k < sig.size(); ++k) rel.name += (k ? "," : "") + std::to_string(sig[k]);
                rel.name += ")";
                rel.signature = sig;
                rel.tuples = gamma.relations[i].tuples();
                it = made.emplace(key, inst.relations.size()).first;
                inst.relations.push_back(std::move(rel));
            }
            inst.constraints.push_back({t, it->second});
        }
    res.assignment = solve_multisorted(inst, res.sort_sizes, opts);
    res.decided_at_step = 3;
    res.member = res.assignment.has_value();
    res.agrees_with_direct = res.member == res.direct_member;
    return res;
}

} // namespace csplift
