#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "detail/tuples.hpp"
#include "error.hpp"

namespace csplift {

class Relation {
public:
    using Predicate = std::function<bool(std::span<const Element>)>;

    Relation() : Relation("", 1, {}) {}

    // Tuples are sorted and de-duplicated. Malformed tuples (wrong length) are
    // kept so that validate_structure can report them; they never match.
    Relation(std::string name, std::size_t arity, std::vector<Tuple> tuples)
        : name_(std::move(name)), arity_(arity) {
        auto table = std::make_shared<Table>();
        std::sort(tuples.begin(), tuples.end());
        tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
        auto& t = *table;
        t.tuples = std::move(tuples);
        Element radix = 1;
        for (const auto& row : t.tuples)
            if (row.size() == arity_)
                for (auto x : row) radix = std::max<Element>(radix, x + 1);
        t.radix = radix;
        auto space = detail::checked_pow(radix, arity_);
        if (space) {
            t.coded = true;
            if (*space <= (std::uint64_t{1} << 22)) {
                t.dense.assign(*space, 0);
                for (const auto& row : t.tuples)
                    if (row.size() == arity_) t.dense[detail::encode(row, radix)] = 1;
            } else {
                for (const auto& row : t.tuples)
                    if (row.size() == arity_) t.codes.push_back(detail::encode(row, radix));
                std::sort(t.codes.begin(), t.codes.end());
            }
        }
        table_ = std::move(table);
    }

    // A relation given by a pure membership predicate over [0, candidate_domain)^arity.
    static Relation lazy(std::string name, std::size_t arity, std::size_t candidate_domain, Predicate pred,
                         bool memoize = true) {
        Relation r;
        r.name_ = std::move(name);
        r.arity_ = arity;
        r.table_.reset();
        r.lazy_ = std::make_shared<Lazy>(arity, candidate_domain, std::move(pred), memoize);
        return r;
    }

    const std::string& name() const { return name_; }
    std::size_t arity() const { return arity_; }
    bool is_lazy() const { return lazy_ != nullptr; }
    std::size_t candidate_domain() const { return lazy_ ? lazy_->domain : table_->radix; }

    const std::vector<Tuple>& tuples() const {
        if (lazy_) throw UnsupportedError("relation '" + name_ + "' is lazy and has no enumerable tuples");
        return table_->tuples;
    }
    std::size_t size() const { return tuples().size(); }

    bool contains(std::span<const Element> t) const {
        if (t.size() != arity_) return false;
        if (lazy_) return lazy_->member(t);
        const auto& tab = *table_;
        if (tab.coded) {
            for (auto x : t)
                if (x >= tab.radix) return false;
            auto c = detail::encode(t, tab.radix);
            if (!tab.dense.empty()) return tab.dense[c] != 0;
            return std::binary_search(tab.codes.begin(), tab.codes.end(), c);
        }
        return std::binary_search(tab.tuples.begin(), tab.tuples.end(), Tuple(t.begin(), t.end()));
    }

    Relation renamed(std::string name) const {
        Relation r = *this;
        r.name_ = std::move(name);
        return r;
    }

private:
    struct Table {
        std::vector<Tuple> tuples;
        Element radix = 1;
        bool coded = false;
        std::vector<std::uint8_t> dense;
        std::vector<std::uint64_t> codes;
    };

    // Memo entries are deterministic, so concurrent writers can only store
    // the same value; races are benign.
    struct Lazy {
        Lazy(std::size_t arity, std::size_t domain, Predicate p, bool memoize)
            : domain(domain), pred(std::move(p)) {
            if (!memoize) return;
            auto space = detail::checked_pow(domain, arity);
            if (!space) return;
            radix = domain;
            use_memo = true;
            if (*space <= (std::uint64_t{1} << 24)) {
                dense = std::make_unique<std::atomic<std::uint8_t>[]>(*space);
                for (std::uint64_t i = 0; i < *space; ++i) dense[i].store(0, std::memory_order_relaxed);
            }
        }
        bool member(std::span<const Element> t) {
            for (auto x : t)
                if (x >= domain) return false;
            if (!use_memo) return pred(t);
            auto code = detail::encode(t, radix);
            if (dense) {
                auto v = dense[code].load(std::memory_order_relaxed);
                if (v) return v == 2;
                bool r = pred(t);
                dense[code].store(r ? 2 : 1, std::memory_order_relaxed);
                return r;
            }
            {
                std::shared_lock lock(mutex);
                auto it = sparse.find(code);
                if (it != sparse.end()) return it->second;
            }
            bool r = pred(t);
            std::unique_lock lock(mutex);
            sparse[code] = r;
            return r;
        }
        std::size_t domain;
        Predicate pred;
        bool use_memo = false;
        std::uint64_t radix = 1;
        std::unique_ptr<std::atomic<std::uint8_t>[]> dense;
        std::shared_mutex mutex;
        std::unordered_map<std::uint64_t, bool> sparse;
    };

    std::string name_;
    std::size_t arity_ = 1;
    std::shared_ptr<const Table> table_;
    std::shared_ptr<Lazy> lazy_;
};

struct RelationalStructure {
    std::string name;
    std::size_t domain_size = 0;
    std::vector<Relation> relations;

    std::vector<std::size_t> arities() const {
        std::vector<std::size_t> a;
        for (const auto& r : relations) a.push_back(r.arity());
        return a;
    }
    bool compatible_with(const RelationalStructure& other) const { return arities() == other.arities(); }
    bool has_lazy_relations() const {
        return std::any_of(relations.begin(), relations.end(), [](const Relation& r) { return r.is_lazy(); });
    }
};

using Map = std::vector<Element>;

inline void require_compatible(const RelationalStructure& a, const RelationalStructure& b) {
    if (!a.compatible_with(b))
        throw SignatureError("signature mismatch between '" + a.name + "' and '" + b.name + "'");
}

struct Violation {
    std::string relation;
    std::size_t tuple_index;
    std::string message;
};

inline std::vector<Violation> validate_structure(const RelationalStructure& s) {
    std::vector<Violation> out;
    for (const auto& r : s.relations) {
        if (r.is_lazy()) continue;
        const auto& ts = r.tuples();
        for (std::size_t k = 0; k < ts.size(); ++k) {
            if (ts[k].size() != r.arity())
                out.push_back({r.name(), k,
                               "tuple of length " + std::to_string(ts[k].size()) + " in relation of arity " +
                                   std::to_string(r.arity())});
            for (auto x : ts[k])
                if (x >= s.domain_size)
                    out.push_back({r.name(), k, "entry " + std::to_string(x) + " out of range"});
        }
    }
    return out;
}

inline bool is_homomorphism(const RelationalStructure& src, const RelationalStructure& dst, std::span<const Element> map) {
    require_compatible(src, dst);
    if (map.size() != src.domain_size) return false;
    for (auto x : map)
        if (x >= dst.domain_size) return false;
    Tuple img;
    for (std::size_t i = 0; i < src.relations.size(); ++i) {
        for (const auto& t : src.relations[i].tuples()) {
            img.resize(t.size());
            for (std::size_t j = 0; j < t.size(); ++j) {
                if (t[j] >= map.size()) return false;
                img[j] = map[t[j]];
            }
            if (!dst.relations[i].contains(img)) return false;
        }
    }
    return true;
}

inline constexpr std::uint64_t default_power_limit = 1'000'000;

// Domain elements of the power are n-tuples ranked lexicographically.
inline RelationalStructure power_structure(const RelationalStructure& t, std::size_t n,
                                           std::uint64_t limit = default_power_limit) {
    if (n == 0) throw PreconditionError("power_structure: n must be at least 1");
    auto dom = detail::checked_pow(t.domain_size, n);
    if (!dom || *dom > limit)
        throw CapacityError("power_structure: domain " + std::to_string(t.domain_size) + "^" + std::to_string(n) +
                            " exceeds limit " + std::to_string(limit));
    RelationalStructure p;
    p.name = t.name + "^" + std::to_string(n);
    p.domain_size = *dom;
    for (const auto& rel : t.relations) {
        const auto& rows = rel.tuples();
        const std::size_t m = rel.arity();
        std::vector<Tuple> out;
        auto cnt = detail::checked_pow(rows.size(), n);
        if (!cnt || *cnt > 50 * limit)
            throw CapacityError("power_structure: relation '" + rel.name() + "' would have too many tuples");
        if (!rows.empty()) {
            out.reserve(*cnt);
            std::vector<std::size_t> pick(n, 0), radix(n, rows.size());
            do {
                Tuple u(m, 0);
                for (std::size_t j = 0; j < m; ++j) {
                    std::uint64_t c = 0;
                    for (std::size_t k = 0; k < n; ++k) c = c * t.domain_size + rows[pick[k]][j];
                    u[j] = static_cast<Element>(c);
                }
                out.push_back(std::move(u));
            } while (detail::next_digits(pick, radix));
        }
        p.relations.emplace_back(rel.name(), m, std::move(out));
    }
    return p;
}

inline RelationalStructure disjoint_union(std::span<const RelationalStructure> parts) {
    RelationalStructure u;
    u.name = "union";
    if (parts.empty()) return u;
    std::vector<std::vector<Tuple>> rels(parts[0].relations.size());
    std::size_t offset = 0;
    for (const auto& s : parts) {
        require_compatible(parts[0], s);
        for (std::size_t i = 0; i < s.relations.size(); ++i)
            for (auto t : s.relations[i].tuples()) {
                for (auto& x : t) x += static_cast<Element>(offset);
                rels[i].push_back(std::move(t));
            }
        offset += s.domain_size;
    }
    u.domain_size = offset;
    for (std::size_t i = 0; i < rels.size(); ++i)
        u.relations.emplace_back(parts[0].relations[i].name(), parts[0].relations[i].arity(), std::move(rels[i]));
    return u;
}

} // namespace csplift
