#pragma once

#include <cstdlib>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "detail/bitset.hpp"
#include "relational.hpp"

namespace csplift {

enum class VarOrder { lexicographic, smallest_domain };

inline std::uint64_t default_max_nodes() {
    if (const char* env = std::getenv("CSPLIFT_MAX_NODES")) {
        char* end = nullptr;
        auto v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
    }
    return 500'000'000;
}

struct SearchOptions {
    VarOrder order = VarOrder::lexicographic;
    std::uint64_t max_nodes = default_max_nodes();
    // Lazy constraints with two or more open variables are made arc consistent
    // only when the product of their open domain sizes stays below this bound.
    std::uint64_t lazy_support_budget = std::uint64_t{1} << 22;
    bool decompose = true;
};

namespace detail {

struct Constraint {
    const Relation* rel = nullptr;
    std::vector<std::uint32_t> scope;
    std::vector<std::uint32_t> vars;      // distinct variables of the scope
    std::vector<std::uint32_t> slot;      // scope position -> index into vars
};

inline Constraint make_constraint(const Relation* rel, std::span<const Element> scope) {
    Constraint c;
    c.rel = rel;
    c.scope.assign(scope.begin(), scope.end());
    for (auto v : c.scope) {
        auto it = std::find(c.vars.begin(), c.vars.end(), v);
        c.slot.push_back(static_cast<std::uint32_t>(it - c.vars.begin()));
        if (it == c.vars.end()) c.vars.push_back(v);
    }
    return c;
}

class Engine {
public:
    Engine(std::size_t nvars, std::size_t nvalues, std::vector<Constraint> cons, SearchOptions opts)
        : nvars_(nvars), nvalues_(nvalues), words_(words_for(nvalues)), cons_(std::move(cons)), opts_(opts),
          watch_(nvars) {
        root_.bits.assign(nvars_ * words_, 0);
        root_.sizes.assign(nvars_, static_cast<std::uint32_t>(nvalues_));
        for (std::size_t v = 0; v < nvars_; ++v) {
            auto d = dom(root_, v);
            for (std::size_t a = 0; a < nvalues_; ++a) d.set(a);
        }
        for (std::size_t c = 0; c < cons_.size(); ++c)
            for (auto v : cons_[c].vars) watch_[v].push_back(static_cast<std::uint32_t>(c));
    }

    void restrict_domain(std::size_t var, const std::vector<bool>& allowed) {
        auto d = dom(root_, var);
        for (std::size_t a = 0; a < nvalues_; ++a)
            if (d.test(a) && !(a < allowed.size() && allowed[a])) d.reset(a);
        root_.sizes[var] = static_cast<std::uint32_t>(d.count());
    }

    std::uint64_t nodes() const { return nodes_; }

    std::optional<Map> solve_first() {
        State st = root_;
        if (!propagate_all(st)) return std::nullopt;
        if (!opts_.decompose) {
            std::vector<std::uint32_t> all(nvars_);
            std::iota(all.begin(), all.end(), 0u);
            std::optional<Map> found;
            dfs(st, all, [&](const State& s) {
                found = extract(s);
                return false;
            });
            return found;
        }
        for (const auto& comp : components(st)) {
            std::optional<State> done;
            dfs(st, comp, [&](const State& s) {
                done = s;
                return false;
            });
            if (!done) return std::nullopt;
            st = std::move(*done);
        }
        Map m = extract(st);
        if (!verify(m)) throw Error("internal: solver produced an invalid assignment");
        return m;
    }

    // Calls f on every solution in lexicographic order until f returns false.
    void enumerate(const std::function<bool(const Map&)>& f) {
        State st = root_;
        if (!propagate_all(st)) return;
        std::vector<std::uint32_t> all(nvars_);
        std::iota(all.begin(), all.end(), 0u);
        dfs(st, all, [&](const State& s) { return f(extract(s)); });
    }

private:
    struct State {
        std::vector<std::uint64_t> bits;
        std::vector<std::uint32_t> sizes;
    };

    BitsView dom(State& s, std::size_t v) const { return {s.bits.data() + v * words_, words_}; }
    std::size_t first_value(const State& s, std::size_t v) const {
        BitsView d{const_cast<std::uint64_t*>(s.bits.data()) + v * words_, words_};
        return d.next(0, nvalues_);
    }

    Map extract(const State& s) const {
        Map m(nvars_);
        for (std::size_t v = 0; v < nvars_; ++v) m[v] = static_cast<Element>(first_value(s, v));
        return m;
    }

    bool verify(const Map& m) const {
        Tuple t;
        for (const auto& c : cons_) {
            t.resize(c.scope.size());
            for (std::size_t k = 0; k < c.scope.size(); ++k) t[k] = m[c.scope[k]];
            if (!c.rel->contains(t)) return false;
        }
        return true;
    }

    std::vector<std::vector<std::uint32_t>> components(const State& st) const {
        std::vector<std::uint32_t> parent(nvars_);
        std::iota(parent.begin(), parent.end(), 0u);
        auto find = [&](std::uint32_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& c : cons_) {
            std::int64_t first = -1;
            for (auto v : c.vars) {
                if (st.sizes[v] <= 1) continue;
                if (first < 0)
                    first = v;
                else {
                    auto a = find(static_cast<std::uint32_t>(first)), b = find(v);
                    if (a != b) parent[std::max(a, b)] = std::min(a, b);
                }
            }
        }
        std::vector<std::vector<std::uint32_t>> out;
        std::vector<std::int64_t> index(nvars_, -1);
        for (std::uint32_t v = 0; v < nvars_; ++v) {
            if (st.sizes[v] <= 1) continue;
            auto r = find(v);
            if (index[r] < 0) {
                index[r] = static_cast<std::int64_t>(out.size());
                out.emplace_back();
            }
            out[index[r]].push_back(v);
        }
        return out;
    }

    template <class OnLeaf>
    bool dfs(State& st, const std::vector<std::uint32_t>& vars, OnLeaf&& on_leaf) {
        std::int64_t pick = -1;
        for (auto v : vars) {
            if (st.sizes[v] <= 1) continue;
            if (opts_.order == VarOrder::lexicographic) {
                pick = v;
                break;
            }
            if (pick < 0 || st.sizes[v] < st.sizes[pick]) pick = v;
        }
        if (pick < 0) return on_leaf(static_cast<const State&>(st));
        const auto var = static_cast<std::size_t>(pick);
        std::vector<std::uint32_t> values;
        {
            auto d = dom(st, var);
            for (auto a = d.next(0, nvalues_); a < nvalues_; a = d.next(a + 1, nvalues_))
                values.push_back(static_cast<std::uint32_t>(a));
        }
        for (auto a : values) {
            if (++nodes_ > opts_.max_nodes)
                throw CapacityError("search node cap " + std::to_string(opts_.max_nodes) +
                                    " exceeded (raise CSPLIFT_MAX_NODES)");
            State child = st;
            auto d = dom(child, var);
            d.clear();
            d.set(a);
            child.sizes[var] = 1;
            if (!propagate_from(child, var)) continue;
            if (!dfs(child, vars, on_leaf)) return false;
        }
        return true;
    }

    bool propagate_all(State& st) {
        queue_.clear();
        queued_.assign(cons_.size(), 0);
        for (std::size_t c = 0; c < cons_.size(); ++c) enqueue(c);
        return run_queue(st);
    }

    bool propagate_from(State& st, std::size_t var) {
        queue_.clear();
        queued_.assign(cons_.size(), 0);
        for (auto c : watch_[var]) enqueue(c);
        return run_queue(st);
    }

    void enqueue(std::size_t c) {
        if (!queued_[c]) {
            queued_[c] = 1;
            queue_.push_back(static_cast<std::uint32_t>(c));
        }
    }

    bool run_queue(State& st) {
        while (!queue_.empty()) {
            auto c = queue_.front();
            queue_.pop_front();
            queued_[c] = 0;
            changed_.clear();
            if (!revise(st, cons_[c])) return false;
            for (auto v : changed_)
                for (auto w : watch_[v])
                    if (w != c) enqueue(w);
        }
        return true;
    }

    bool narrow(State& st, std::uint32_t var, const std::vector<std::uint64_t>& keep) {
        auto d = dom(st, var);
        bool changed = false;
        for (std::size_t k = 0; k < words_; ++k) {
            auto nw = d.w[k] & keep[k];
            if (nw != d.w[k]) {
                d.w[k] = nw;
                changed = true;
            }
        }
        if (!changed) return true;
        st.sizes[var] = static_cast<std::uint32_t>(d.count());
        changed_.push_back(var);
        return st.sizes[var] != 0;
    }

    bool revise(State& st, const Constraint& c) {
        const auto& rel = *c.rel;
        if (!rel.is_lazy() && rel.arity() <= 3) return revise_scan(st, c);
        std::vector<std::uint32_t> open;
        for (auto v : c.vars)
            if (st.sizes[v] > 1) open.push_back(v);
        if (open.size() <= 1) return revise_forward(st, c, open);
        if (!rel.is_lazy()) return true;
        std::uint64_t prod = 1;
        for (auto v : open) {
            prod *= st.sizes[v];
            if (prod > opts_.lazy_support_budget) return true;
        }
        return revise_lazy_support(st, c);
    }

    // Generalized arc consistency by scanning the relation's tuples.
    bool revise_scan(State& st, const Constraint& c) {
        const auto nv = c.vars.size();
        sup_.assign(nv * words_, 0);
        for (const auto& t : c.rel->tuples()) {
            if (t.size() != c.scope.size()) continue;
            bool ok = true;
            for (std::size_t k = 0; k < t.size() && ok; ++k) {
                if (t[k] >= nvalues_) {
                    ok = false;
                    break;
                }
                auto v = c.scope[k];
                BitsView d{st.bits.data() + v * words_, words_};
                if (!d.test(t[k])) ok = false;
                for (std::size_t j = 0; j < k && ok; ++j)
                    if (c.scope[j] == v && t[j] != t[k]) ok = false;
            }
            if (!ok) continue;
            for (std::size_t k = 0; k < t.size(); ++k) {
                auto i = c.slot[k];
                sup_[i * words_ + (t[k] >> 6)] |= std::uint64_t{1} << (t[k] & 63);
            }
        }
        for (std::size_t i = 0; i < nv; ++i) {
            keep_.assign(sup_.begin() + i * words_, sup_.begin() + (i + 1) * words_);
            if (!narrow(st, c.vars[i], keep_)) return false;
        }
        return true;
    }

    bool revise_forward(State& st, const Constraint& c, const std::vector<std::uint32_t>& open) {
        tuple_.resize(c.scope.size());
        std::vector<Element> fixed(c.vars.size());
        for (std::size_t i = 0; i < c.vars.size(); ++i)
            fixed[i] = static_cast<Element>(first_value(st, c.vars[i]));
        if (open.empty()) {
            for (std::size_t k = 0; k < c.scope.size(); ++k) tuple_[k] = fixed[c.slot[k]];
            return c.rel->contains(tuple_);
        }
        const auto var = open[0];
        const auto vi = static_cast<std::size_t>(std::find(c.vars.begin(), c.vars.end(), var) - c.vars.begin());
        keep_.assign(words_, 0);
        auto d = dom(st, var);
        for (auto a = d.next(0, nvalues_); a < nvalues_; a = d.next(a + 1, nvalues_)) {
            fixed[vi] = static_cast<Element>(a);
            for (std::size_t k = 0; k < c.scope.size(); ++k) tuple_[k] = fixed[c.slot[k]];
            if (c.rel->contains(tuple_)) keep_[a >> 6] |= std::uint64_t{1} << (a & 63);
        }
        return narrow(st, var, keep_);
    }

    bool revise_lazy_support(State& st, const Constraint& c) {
        const auto nv = c.vars.size();
        std::vector<Element> val(nv);
        std::vector<std::vector<Element>> choices(nv);
        for (std::size_t i = 0; i < nv; ++i) {
            auto d = dom(st, c.vars[i]);
            for (auto a = d.next(0, nvalues_); a < nvalues_; a = d.next(a + 1, nvalues_))
                choices[i].push_back(static_cast<Element>(a));
        }
        sup_.assign(nv * words_, 0);
        tuple_.resize(c.scope.size());
        auto mark = [&]() {
            for (std::size_t i = 0; i < nv; ++i)
                sup_[i * words_ + (val[i] >> 6)] |= std::uint64_t{1} << (val[i] & 63);
        };
        for (std::size_t i = 0; i < nv; ++i) {
            if (choices[i].size() <= 1) continue;
            for (auto a : choices[i]) {
                if ((sup_[i * words_ + (a >> 6)] >> (a & 63)) & 1u) continue;
                std::vector<std::size_t> digit(nv, 0), radix(nv);
                for (std::size_t j = 0; j < nv; ++j) radix[j] = (j == i) ? 1 : choices[j].size();
                bool found = false;
                do {
                    for (std::size_t j = 0; j < nv; ++j) val[j] = (j == i) ? a : choices[j][digit[j]];
                    for (std::size_t k = 0; k < c.scope.size(); ++k) tuple_[k] = val[c.slot[k]];
                    if (c.rel->contains(tuple_)) {
                        found = true;
                        mark();
                        break;
                    }
                } while (next_digits(digit, radix));
                (void)found;
            }
        }
        for (std::size_t i = 0; i < nv; ++i) {
            if (choices[i].size() <= 1) {
                // A fixed variable is supported iff some tuple was found at all.
                bool any = false;
                for (std::size_t k = 0; k < words_; ++k) any = any || sup_[i * words_ + k];
                if (!any) return false;
                continue;
            }
            keep_.assign(sup_.begin() + i * words_, sup_.begin() + (i + 1) * words_);
            if (!narrow(st, c.vars[i], keep_)) return false;
        }
        return true;
    }

    std::size_t nvars_, nvalues_, words_;
    std::vector<Constraint> cons_;
    SearchOptions opts_;
    std::vector<std::vector<std::uint32_t>> watch_;
    State root_;
    std::uint64_t nodes_ = 0;

    std::deque<std::uint32_t> queue_;
    std::vector<std::uint8_t> queued_;
    std::vector<std::uint32_t> changed_;
    std::vector<std::uint64_t> sup_, keep_;
    Tuple tuple_;
};

} // namespace detail

inline void check_source(const RelationalStructure& r) {
    for (const auto& rel : r.relations) {
        if (rel.is_lazy()) throw UnsupportedError("source relation '" + rel.name() + "' must be materialized");
        for (const auto& t : rel.tuples()) {
            if (t.size() != rel.arity())
                throw SignatureError("relation '" + rel.name() + "' holds a tuple of the wrong length");
            for (auto x : t)
                if (x >= r.domain_size)
                    throw PreconditionError("relation '" + rel.name() + "' has entry " + std::to_string(x) +
                                            " outside the domain of '" + r.name + "'");
        }
    }
}

inline detail::Engine make_engine(const RelationalStructure& r, const RelationalStructure& t, SearchOptions opts) {
    require_compatible(r, t);
    check_source(r);
    std::vector<detail::Constraint> cons;
    for (std::size_t i = 0; i < r.relations.size(); ++i)
        for (const auto& tup : r.relations[i].tuples()) cons.push_back(detail::make_constraint(&t.relations[i], tup));
    return detail::Engine(r.domain_size, t.domain_size, std::move(cons), opts);
}

inline std::optional<Map> find_homomorphism(const RelationalStructure& r, const RelationalStructure& t,
                                            SearchOptions opts = {}) {
    require_compatible(r, t);
    check_source(r);
    if (r.domain_size == 0) return Map{};
    if (t.domain_size == 0) return std::nullopt;
    return make_engine(r, t, opts).solve_first();
}

// Visits homomorphisms in lexicographic order; the callback returns false to stop.
inline void for_each_homomorphism(const RelationalStructure& r, const RelationalStructure& t,
                                  const std::function<bool(const Map&)>& f, SearchOptions opts = {}) {
    require_compatible(r, t);
    check_source(r);
    if (r.domain_size == 0) {
        f(Map{});
        return;
    }
    if (t.domain_size == 0) return;
    make_engine(r, t, opts).enumerate(f);
}

inline std::uint64_t count_homomorphisms(const RelationalStructure& r, const RelationalStructure& t) {
    std::uint64_t n = 0;
    for_each_homomorphism(r, t, [&](const Map&) {
        ++n;
        return true;
    });
    return n;
}

inline bool upper_than(const RelationalStructure& a, const RelationalStructure& b, SearchOptions opts = {}) {
    return find_homomorphism(a, b, opts).has_value();
}

inline bool hom_equivalent(const RelationalStructure& a, const RelationalStructure& b, SearchOptions opts = {}) {
    return upper_than(a, b, opts) && upper_than(b, a, opts);
}

inline bool up_membership(const RelationalStructure& r, std::span<const RelationalStructure> list,
                          SearchOptions opts = {}) {
    for (const auto& other : list)
        if (upper_than(r, other, opts)) return true;
    return false;
}

} // namespace csplift
