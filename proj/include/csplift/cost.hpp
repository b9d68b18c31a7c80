#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "operations.hpp"
#include "relational.hpp"

namespace csplift {

// Exact rational with 64-bit parts; every operation checks for overflow.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
    Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
        __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return from_wide(n, d);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num_, b.den_); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        __int128 l = static_cast<__int128>(a.num_) * b.den_, r = static_cast<__int128>(b.num_) * a.den_;
        return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }

private:
    static Rational from_wide(__int128 n, __int128 d) {
        if (d == 0) throw PreconditionError("rational with zero denominator");
        if (d < 0) n = -n, d = -d;
        __int128 a = n < 0 ? -n : n, b = d;
        while (b) {
            auto t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) n /= a, d /= a;
        constexpr __int128 lo = INT64_MIN, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi) throw OverflowError("rational arithmetic overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }
    void assign(std::int64_t n, std::int64_t d) { *this = from_wide(n, d); }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

class CostValue {
public:
    CostValue() = default;
    CostValue(Rational q) : finite_(true), q_(q) {}  // NOLINT(google-explicit-constructor)
    CostValue(std::int64_t n) : finite_(true), q_(n) {}  // NOLINT(google-explicit-constructor)
    static CostValue infinity() {
        CostValue c;
        c.finite_ = false;
        return c;
    }

    bool is_finite() const { return finite_; }
    bool is_infinite() const { return !finite_; }
    const Rational& value() const {
        if (!finite_) throw PreconditionError("infinite cost has no rational value");
        return q_;
    }

    friend CostValue operator+(const CostValue& a, const CostValue& b) {
        if (!a.finite_ || !b.finite_) return infinity();
        return CostValue(a.q_ + b.q_);
    }
    // Scaling by a positive rational.
    friend CostValue operator*(const Rational& w, const CostValue& c) {
        if (!c.finite_) return infinity();
        return CostValue(w * c.q_);
    }
    friend bool operator==(const CostValue& a, const CostValue& b) {
        return a.finite_ == b.finite_ && (!a.finite_ || a.q_ == b.q_);
    }
    friend std::strong_ordering operator<=>(const CostValue& a, const CostValue& b) {
        if (!a.finite_ || !b.finite_) {
            if (a.finite_ == b.finite_) return std::strong_ordering::equal;
            return a.finite_ ? std::strong_ordering::less : std::strong_ordering::greater;
        }
        return a.q_ <=> b.q_;
    }

    std::string str() const { return finite_ ? q_.str() : "inf"; }

private:
    bool finite_ = true;
    Rational q_{0};
};

class CostFunction {
public:
    CostFunction() = default;
    // Every tuple starts at infinity.
    CostFunction(std::string name, std::size_t domain_size, std::size_t arity)
        : name_(std::move(name)), domain_size_(domain_size), arity_(arity),
          table_(detail::pow_or_throw(domain_size, arity, "cost table"), CostValue::infinity()) {}

    const std::string& name() const { return name_; }
    std::size_t domain_size() const { return domain_size_; }
    std::size_t arity() const { return arity_; }

    CostValue operator()(std::span<const Element> x) const {
        for (auto a : x)
            if (a >= domain_size_) return CostValue::infinity();
        return table_[detail::encode(x, domain_size_)];
    }
    CostValue operator()(std::initializer_list<Element> x) const {
        return (*this)(std::span<const Element>(x.begin(), x.size()));
    }
    const CostValue& at(std::uint64_t index) const { return table_[index]; }
    void set(std::span<const Element> x, CostValue c) { table_[detail::encode(x, domain_size_)] = c; }
    void set(std::initializer_list<Element> x, CostValue c) { set(std::span<const Element>(x.begin(), x.size()), c); }
    std::uint64_t table_size() const { return table_.size(); }

    std::vector<Tuple> dom() const {
        std::vector<Tuple> out;
        Tuple x(arity_);
        for (std::uint64_t i = 0; i < table_.size(); ++i)
            if (table_[i].is_finite()) {
                detail::decode(i, domain_size_, x);
                out.push_back(x);
            }
        return out;
    }

    CostFunction renamed(std::string n) const {
        CostFunction f = *this;
        f.name_ = std::move(n);
        return f;
    }

    friend bool operator==(const CostFunction& a, const CostFunction& b) {
        return a.domain_size_ == b.domain_size_ && a.arity_ == b.arity_ && a.table_ == b.table_;
    }

private:
    std::string name_;
    std::size_t domain_size_ = 0;
    std::size_t arity_ = 0;
    std::vector<CostValue> table_;
};

struct ValuedTemplate {
    std::string name;
    std::size_t domain_size = 0;
    std::vector<CostFunction> functions;

    std::vector<std::size_t> arities() const {
        std::vector<std::size_t> a;
        for (const auto& f : functions) a.push_back(f.arity());
        return a;
    }
};

struct VcspTerm {
    Tuple scope;
    std::size_t function = 0;
    Rational weight{1};
};

struct VcspInstance {
    std::size_t variable_count = 0;
    std::size_t domain_size = 0;
    std::vector<CostFunction> functions;
    std::vector<VcspTerm> terms;

    void validate() const {
        for (const auto& t : terms) {
            if (t.function >= functions.size()) throw PreconditionError("vcsp term refers to a missing function");
            if (t.scope.size() != functions[t.function].arity()) throw SignatureError("vcsp term scope length mismatch");
            if (t.weight <= Rational(0)) throw PreconditionError("vcsp weights must be positive");
            for (auto v : t.scope)
                if (v >= variable_count) throw PreconditionError("vcsp scope variable out of range");
        }
    }
};

inline CostValue evaluate_instance(const VcspInstance& inst, std::span<const Element> h) {
    if (h.size() != inst.variable_count) throw PreconditionError("evaluate_instance: assignment is not total");
    CostValue total(0);
    Tuple x;
    for (const auto& t : inst.terms) {
        x.resize(t.scope.size());
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = h[t.scope[k]];
        total = total + t.weight * inst.functions[t.function](x);
        if (total.is_infinite()) return total;
    }
    return total;
}

struct VcspSolution {
    Map assignment;
    CostValue cost;
};

inline VcspSolution brute_solve_vcsp(const VcspInstance& inst, std::uint64_t limit = 1'000'000) {
    inst.validate();
    auto space = detail::checked_pow(inst.domain_size, inst.variable_count);
    if (!space || *space > limit)
        throw CapacityError("brute_solve_vcsp: " + std::to_string(inst.domain_size) + "^" +
                            std::to_string(inst.variable_count) + " assignments exceed " + std::to_string(limit));
    Map h(inst.variable_count, 0);
    VcspSolution best{h, evaluate_instance(inst, h)};
    if (inst.domain_size == 0) return best;
    while (detail::next_tuple(h, static_cast<Element>(inst.domain_size))) {
        auto c = evaluate_instance(inst, h);
        if (c < best.cost) best = {h, c};
    }
    return best;
}

// One term per relation tuple; weights[i] applies to relation i (default 1).
inline VcspInstance hybrid_instance_from(const RelationalStructure& r, const ValuedTemplate& g,
                                         std::span<const Rational> weights = {}) {
    if (r.arities() != g.arities()) throw SignatureError("hybrid_instance_from: signature mismatch");
    VcspInstance inst;
    inst.variable_count = r.domain_size;
    inst.domain_size = g.domain_size;
    inst.functions = g.functions;
    for (std::size_t i = 0; i < r.relations.size(); ++i)
        for (const auto& t : r.relations[i].tuples())
            inst.terms.push_back({t, i, i < weights.size() ? weights[i] : Rational(1)});
    inst.validate();
    return inst;
}

struct WeightedOperation {
    FiniteOperation op;
    Rational probability;
};

// Sum_g w(g) f(g(x)) <= (1/m) Sum_i f(x^i), checked after multiplying by m.
inline bool is_multimorphism(std::span<const WeightedOperation> omega, const CostFunction& f) {
    if (omega.empty()) throw PreconditionError("is_multimorphism: empty operation list");
    Rational sum(0);
    const auto m = omega[0].op.arity();
    for (const auto& w : omega) {
        if (w.probability <= Rational(0)) throw PreconditionError("is_multimorphism: probabilities must be positive");
        if (w.op.arity() != m) throw SignatureError("is_multimorphism: operations differ in arity");
        sum = sum + w.probability;
    }
    if (sum != Rational(1)) throw PreconditionError("is_multimorphism: probabilities sum to " + sum.str());
    auto dom = f.dom();
    if (dom.empty()) return true;
    const auto p = f.arity();
    std::vector<std::size_t> pick(m, 0), radix(m, dom.size());
    Tuple y(p), args(m);
    do {
        CostValue rhs(0);
        for (std::size_t i = 0; i < m; ++i) rhs = rhs + f(dom[pick[i]]);
        CostValue lhs(0);
        for (const auto& w : omega) {
            for (std::size_t j = 0; j < p; ++j) {
                for (std::size_t i = 0; i < m; ++i) args[i] = dom[pick[i]][j];
                y[j] = w.op(args);
            }
            lhs = lhs + w.probability * f(y);
            if (lhs.is_infinite()) return false;
        }
        if (Rational(static_cast<std::int64_t>(m)) * lhs > rhs) return false;
    } while (detail::next_digits(pick, radix));
    return true;
}

} // namespace csplift
