#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "relational.hpp"
#include "solver.hpp"

namespace csplift {

class FiniteOperation {
public:
    FiniteOperation() = default;

    FiniteOperation(std::string name, std::size_t domain_size, std::size_t arity, std::vector<Element> table)
        : name_(std::move(name)), domain_size_(domain_size), arity_(arity), table_(std::move(table)) {
        auto expect = detail::pow_or_throw(domain_size, arity, "operation table");
        if (table_.size() != expect)
            throw PreconditionError("operation '" + name_ + "': table has " + std::to_string(table_.size()) +
                                    " entries, expected " + std::to_string(expect));
        for (auto v : table_)
            if (v >= domain_size)
                throw PreconditionError("operation '" + name_ + "': value " + std::to_string(v) + " out of range");
    }

    template <class F>
    static FiniteOperation from_function(std::string name, std::size_t d, std::size_t arity, F&& f) {
        auto n = detail::pow_or_throw(d, arity, "operation table");
        std::vector<Element> table(n);
        Tuple args(arity, 0);
        for (std::uint64_t i = 0; i < n; ++i) {
            detail::decode(i, d, args);
            table[i] = static_cast<Element>(f(std::span<const Element>(args)));
        }
        return FiniteOperation(std::move(name), d, arity, std::move(table));
    }

    static FiniteOperation constant(std::size_t d, std::size_t arity, Element a) {
        return from_function("const" + std::to_string(a), d, arity, [a](auto) { return a; });
    }
    static FiniteOperation projection(std::size_t d, std::size_t arity, std::size_t i) {
        return from_function("proj" + std::to_string(i + 1), d, arity, [i](auto x) { return x[i]; });
    }

    const std::string& name() const { return name_; }
    std::size_t domain_size() const { return domain_size_; }
    std::size_t arity() const { return arity_; }
    const std::vector<Element>& table() const { return table_; }

    Element at(std::uint64_t index) const { return table_[index]; }
    Element operator()(std::span<const Element> args) const {
        return table_[detail::encode(args, domain_size_)];
    }
    Element operator()(std::initializer_list<Element> args) const {
        return (*this)(std::span<const Element>(args.begin(), args.size()));
    }

    FiniteOperation renamed(std::string n) const {
        FiniteOperation r = *this;
        r.name_ = std::move(n);
        return r;
    }

    // Equality is extensional; names are labels only.
    friend bool operator==(const FiniteOperation& a, const FiniteOperation& b) {
        return a.domain_size_ == b.domain_size_ && a.arity_ == b.arity_ && a.table_ == b.table_;
    }
    friend bool operator<(const FiniteOperation& a, const FiniteOperation& b) {
        return std::tie(a.arity_, a.domain_size_, a.table_) < std::tie(b.arity_, b.domain_size_, b.table_);
    }

private:
    std::string name_;
    std::size_t domain_size_ = 0;
    std::size_t arity_ = 0;
    std::vector<Element> table_;
};

struct OperationSystem {
    std::vector<std::size_t> arities;
    std::vector<std::vector<FiniteOperation>> ops;  // ops[i][j] has arity arities[i]

    void validate() const {
        if (ops.size() != arities.size()) throw SignatureError("operation system: symbol count mismatch");
        std::size_t d = 0;
        bool have = false;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            if (ops[i].size() != arities[i])
                throw SignatureError("operation system: symbol " + std::to_string(i) + " needs " +
                                     std::to_string(arities[i]) + " operations");
            for (const auto& f : ops[i]) {
                if (f.arity() != arities[i]) throw SignatureError("operation system: arity mismatch");
                if (have && f.domain_size() != d) throw SignatureError("operation system: mixed domains");
                d = f.domain_size();
                have = true;
            }
        }
    }
};

// Applies ops[j] to column j of every choice of n rows from rho (n = common arity).
inline bool componentwise_preserves(std::span<const FiniteOperation> ops, const Relation& rho) {
    if (ops.size() != rho.arity())
        throw SignatureError("componentwise_preserves: " + std::to_string(ops.size()) + " operations for a relation of arity " +
                             std::to_string(rho.arity()));
    if (ops.empty()) return true;
    const auto n = ops[0].arity();
    for (const auto& f : ops)
        if (f.arity() != n || f.domain_size() != ops[0].domain_size())
            throw SignatureError("componentwise_preserves: operations differ in arity or domain");
    const auto& rows = rho.tuples();
    const auto m = rho.arity();
    if (rows.empty() && n > 0) return true;
    std::vector<std::size_t> pick(n, 0), radix(n, rows.size());
    Tuple out(m), args(n);
    do {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < n; ++k) args[k] = rows[pick[k]][j];
            out[j] = ops[j](args);
        }
        if (!rho.contains(out)) return false;
    } while (detail::next_digits(pick, radix));
    return true;
}

inline bool preserves_relation(const FiniteOperation& op, const Relation& rho) {
    if (rho.is_lazy()) throw UnsupportedError("preserves_relation: relation '" + rho.name() + "' is lazy");
    std::vector<FiniteOperation> ops(rho.arity(), op);
    return componentwise_preserves(ops, rho);
}

inline bool is_polymorphism(const FiniteOperation& op, const RelationalStructure& s) {
    for (const auto& r : s.relations)
        if (!preserves_relation(op, r)) return false;
    return true;
}

inline std::vector<Element> image_of(const FiniteOperation& g) {
    std::vector<bool> seen(g.domain_size(), false);
    for (auto v : g.table()) seen[v] = true;
    std::vector<Element> img;
    for (Element a = 0; a < g.domain_size(); ++a)
        if (seen[a]) img.push_back(a);
    return img;
}

struct SiggersPair {
    FiniteOperation g;  // unary
    FiniteOperation s;  // 4-ary
    friend bool operator==(const SiggersPair& a, const SiggersPair& b) { return a.g == b.g && a.s == b.s; }
};

// s restricted to an image set S: closure, s(x,y,x,z)=s(y,x,z,y), s(x,x,x,x)=x.
inline bool is_siggers_on(const FiniteOperation& s, std::span<const Element> img) {
    const auto d = s.domain_size();
    std::vector<bool> in(d, false);
    for (auto a : img) in[a] = true;
    for (auto a : img)
        for (auto b : img)
            for (auto c : img)
                for (auto e : img)
                    if (!in[s({a, b, c, e})]) return false;
    for (auto x : img) {
        if (s({x, x, x, x}) != x) return false;
        for (auto y : img)
            for (auto z : img)
                if (s({x, y, x, z}) != s({y, x, z, y})) return false;
    }
    return true;
}

inline bool is_siggers_pair(const FiniteOperation& g, const FiniteOperation& s) {
    if (g.arity() != 1 || s.arity() != 4 || g.domain_size() != s.domain_size()) return false;
    auto img = image_of(g);
    return is_siggers_on(s, img);
}

inline SiggersPair constant_pair(std::size_t d, Element a) {
    return {FiniteOperation::constant(d, 1, a), FiniteOperation::constant(d, 4, a)};
}

// Canonical order: g tables lexicographically, then s tables lexicographically.
inline void for_each_siggers_pair(std::size_t d, const std::function<bool(const SiggersPair&)>& f) {
    if (d >= 3)
        throw CapacityError("enumerate_siggers_pairs: domain size " + std::to_string(d) +
                            " is too large for full enumeration; use find_siggers_pair_admitted");
    if (d == 0) return;
    const std::size_t ng = d, ns = d * d * d * d;
    std::vector<Element> gt(ng, 0);
    do {
        FiniteOperation g("g", d, 1, gt);
        auto img = image_of(g);
        std::vector<Element> st(ns, 0);
        do {
            FiniteOperation s("s", d, 4, st);
            if (is_siggers_on(s, img))
                if (!f(SiggersPair{g, std::move(s)})) return;
        } while (detail::next_tuple(st, static_cast<Element>(d)));
    } while (detail::next_tuple(gt, static_cast<Element>(d)));
}

inline std::vector<SiggersPair> enumerate_siggers_pairs(std::size_t d) {
    std::vector<SiggersPair> out;
    for_each_siggers_pair(d, [&](const SiggersPair& p) {
        out.push_back(p);
        return true;
    });
    return out;
}

// Unary polymorphisms are exactly the endomorphisms; they are found by
// homomorphism search, which yields them in lexicographic table order.
inline void for_each_unary_polymorphism(const RelationalStructure& gamma, const std::function<bool(const FiniteOperation&)>& f,
                                        SearchOptions opts = {}) {
    for_each_homomorphism(gamma, gamma, [&](const Map& m) { return f(FiniteOperation("g", gamma.domain_size, 1, m)); }, opts);
}

// Indicator problem for a 4-ary s: homomorphisms from the 4th power of gamma
// (augmented by identity, closure and idempotence gadgets) back into gamma.
inline std::optional<FiniteOperation> find_siggers_operation_on(const RelationalStructure& gamma, std::span<const Element> img,
                                                                SearchOptions opts = {}) {
    const auto d = gamma.domain_size;
    RelationalStructure src = power_structure(gamma, 4);
    RelationalStructure dst = gamma;
    auto idx = [d](Element a, Element b, Element c, Element e) {
        return static_cast<Element>(((a * d + b) * d + c) * d + e);
    };
    std::vector<Tuple> eq_src, eq_dst, in_src, in_dst;
    for (Element a = 0; a < d; ++a) eq_dst.push_back({a, a});
    for (auto x : img)
        for (auto y : img)
            for (auto z : img)
                if (idx(x, y, x, z) != idx(y, x, z, y)) eq_src.push_back({idx(x, y, x, z), idx(y, x, z, y)});
    for (auto a : img) {
        in_dst.push_back({a});
        for (auto b : img)
            for (auto c : img)
                for (auto e : img) in_src.push_back({idx(a, b, c, e)});
    }
    src.relations.emplace_back("siggers-eq", 2, std::move(eq_src));
    dst.relations.emplace_back("siggers-eq", 2, std::move(eq_dst));
    src.relations.emplace_back("closure", 1, std::move(in_src));
    dst.relations.emplace_back("closure", 1, std::move(in_dst));
    for (auto a : img) {
        src.relations.emplace_back("fix", 1, std::vector<Tuple>{{idx(a, a, a, a)}});
        dst.relations.emplace_back("fix", 1, std::vector<Tuple>{{a}});
    }
    auto h = find_homomorphism(src, dst, opts);
    if (!h) return std::nullopt;
    return FiniteOperation("s", d, 4, *h);
}

inline std::optional<SiggersPair> find_siggers_pair_admitted(const RelationalStructure& gamma, SearchOptions opts = {}) {
    std::optional<SiggersPair> found;
    std::set<std::vector<Element>> failed;
    for_each_unary_polymorphism(
        gamma,
        [&](const FiniteOperation& g) {
            auto img = image_of(g);
            if (failed.count(img)) return true;
            auto s = find_siggers_operation_on(gamma, img, opts);
            if (!s) {
                failed.insert(img);
                return true;
            }
            found = SiggersPair{g, *s};
            return false;
        },
        opts);
    return found;
}

// Term operations of each arity 1..max_arity; result[n] holds arity n in
// canonical (table-lexicographic) order. result[0] holds nullary terms.
inline std::vector<std::vector<FiniteOperation>> clone_closure_by_arity(std::span<const FiniteOperation> gens,
                                                                         std::size_t domain_size, std::size_t max_arity,
                                                                         std::size_t cap = 200'000) {
    const auto d = domain_size;
    for (const auto& f : gens)
        if (f.domain_size() != d) throw SignatureError("clone_closure_upto: generators over different domains");
    std::vector<std::vector<FiniteOperation>> result(max_arity + 1);
    for (std::size_t n = 0; n <= max_arity; ++n) {
        const auto rows = detail::pow_or_throw(d, n, "clone table");
        std::set<std::vector<Element>> have;
        std::vector<std::vector<Element>> list;
        auto add = [&](std::vector<Element> t) {
            if (have.insert(t).second) {
                list.push_back(std::move(t));
                if (list.size() > cap) throw CapacityError("clone_closure_upto: more than " + std::to_string(cap) + " terms");
            }
        };
        for (std::size_t i = 0; i < n; ++i) add(FiniteOperation::projection(d, n, i).table());
        std::size_t done = 0;
        while (true) {
            const std::size_t before = list.size();
            for (const auto& f : gens) {
                const auto k = f.arity();
                if (k == 0) {
                    add(std::vector<Element>(rows, f.at(0)));
                    continue;
                }
                if (list.empty()) continue;
                // New terms must use at least one term added in the previous round.
                std::vector<std::size_t> pick(k, 0), radix(k, before);
                Tuple args(k);
                do {
                    bool fresh = done == 0;
                    for (auto p : pick) fresh = fresh || p >= done;
                    if (!fresh) continue;
                    std::vector<Element> t(rows);
                    for (std::uint64_t r = 0; r < rows; ++r) {
                        for (std::size_t j = 0; j < k; ++j) args[j] = list[pick[j]][r];
                        t[r] = f(args);
                    }
                    add(std::move(t));
                } while (detail::next_digits(pick, radix));
            }
            if (list.size() == before) break;
            done = before;
        }
        std::sort(list.begin(), list.end());
        for (auto& t : list) result[n].emplace_back("t", d, n, std::move(t));
    }
    return result;
}

inline std::vector<FiniteOperation> clone_closure_upto(std::span<const FiniteOperation> gens, std::size_t domain_size,
                                                       std::size_t max_arity) {
    std::vector<FiniteOperation> out;
    for (auto& layer : clone_closure_by_arity(gens, domain_size, max_arity))
        for (auto& f : layer) out.push_back(std::move(f));
    return out;
}

namespace boolean_ops {
inline FiniteOperation min2() { return FiniteOperation("min", 2, 2, {0, 0, 0, 1}); }
inline FiniteOperation max2() { return FiniteOperation("max", 2, 2, {0, 1, 1, 1}); }
inline FiniteOperation nand2() { return FiniteOperation("nand", 2, 2, {1, 1, 1, 0}); }
inline FiniteOperation majority3() {
    return FiniteOperation::from_function("majority", 2, 3, [](auto x) { return (x[0] + x[1] + x[2]) >= 2 ? 1 : 0; });
}
inline FiniteOperation minority3() {
    return FiniteOperation::from_function("minority", 2, 3, [](auto x) { return x[0] ^ x[1] ^ x[2]; });
}
} // namespace boolean_ops

// Schaefer witnesses: constant 0, constant 1, min, max, majority, minority.
inline bool boolean_algebra_tractable(std::span<const FiniteOperation> ops) {
    for (const auto& f : ops)
        if (f.domain_size() != 2)
            throw UnsupportedError("boolean_algebra_tractable: domain size " + std::to_string(f.domain_size()) +
                                   " is not Boolean; supply a custom oracle");
    std::vector<FiniteOperation> gens;
    for (const auto& f : ops)
        if (f.arity() > 0) gens.push_back(f);
    auto layers = clone_closure_by_arity(gens, 2, 3);
    auto has = [&](const FiniteOperation& w) {
        const auto& layer = layers[w.arity()];
        return std::find(layer.begin(), layer.end(), w) != layer.end();
    };
    return has(FiniteOperation::constant(2, 1, 0)) || has(FiniteOperation::constant(2, 1, 1)) ||
           has(boolean_ops::min2()) || has(boolean_ops::max2()) || has(boolean_ops::majority3()) ||
           has(boolean_ops::minority3());
}

} // namespace csplift
