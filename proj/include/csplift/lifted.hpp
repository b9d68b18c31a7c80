#pragma once

#include <limits>
#include <numeric>
#include <variant>

#include "cost.hpp"
#include "operations.hpp"
#include "solver.hpp"

namespace csplift {

inline constexpr std::size_t no_base_relation = std::numeric_limits<std::size_t>::max();

struct LiftedRelationInfo {
    std::size_t base = no_base_relation;  // index into the base template; no_base_relation for Dom@v
    Tuple scope;                          // (v1..vp), or (v) for Dom@v
};

// Relation order: f_i^v for each base relation i and each v in r_i (in r_i's
// order), then Dom@v for every variable v.
inline std::vector<LiftedRelationInfo> lifted_layout(const RelationalStructure& r) {
    std::vector<LiftedRelationInfo> info;
    for (std::size_t i = 0; i < r.relations.size(); ++i)
        for (const auto& v : r.relations[i].tuples()) info.push_back({i, v});
    for (Element v = 0; v < r.domain_size; ++v) info.push_back({no_base_relation, {v}});
    return info;
}

inline std::string lifted_relation_name(const LiftedRelationInfo& li) {
    std::string s;
    if (li.base == no_base_relation) return "Dom@" + std::to_string(li.scope[0]);
    s = "f_" + std::to_string(li.base) + "@";
    for (std::size_t k = 0; k < li.scope.size(); ++k) s += (k ? "," : "") + std::to_string(li.scope[k]);
    return s;
}

struct LiftedLanguage {
    RelationalStructure base_template;
    RelationalStructure base_input;
    std::size_t base_domain = 0;
    std::size_t variable_count = 0;
    RelationalStructure structure;
    std::vector<LiftedRelationInfo> info;

    Element encode(Element v, Element a) const { return static_cast<Element>(v * base_domain + a); }
    Element block_of(Element x) const { return static_cast<Element>(x / base_domain); }
    Element local_of(Element x) const { return static_cast<Element>(x % base_domain); }
    std::size_t dom_relation(Element v) const { return info.size() - variable_count + v; }
};

inline LiftedLanguage lift_language(const RelationalStructure& gamma, const RelationalStructure& r) {
    require_compatible(r, gamma);
    check_source(r);
    LiftedLanguage l;
    l.base_template = gamma;
    l.base_input = r;
    l.base_domain = gamma.domain_size;
    l.variable_count = r.domain_size;
    l.info = lifted_layout(r);
    l.structure.name = gamma.name + "_lifted";
    l.structure.domain_size = gamma.domain_size * r.domain_size;
    for (const auto& li : l.info) {
        std::vector<Tuple> tuples;
        if (li.base == no_base_relation) {
            for (Element a = 0; a < gamma.domain_size; ++a) tuples.push_back({l.encode(li.scope[0], a)});
        } else {
            for (auto y : gamma.relations[li.base].tuples()) {
                for (std::size_t j = 0; j < y.size(); ++j) y[j] = l.encode(li.scope[j], y[j]);
                tuples.push_back(std::move(y));
            }
        }
        l.structure.relations.emplace_back(lifted_relation_name(li), li.scope.size(), std::move(tuples));
    }
    return l;
}

struct LiftedValuedLanguage {
    std::size_t base_domain = 0;
    std::size_t variable_count = 0;
    ValuedTemplate lifted;
    std::vector<LiftedRelationInfo> info;
};

// f^v(x) = f(y) when x = d(v,y), infinity otherwise; Dom@v is the 0/inf indicator of D_v.
inline LiftedValuedLanguage lift_language(const ValuedTemplate& gamma, const RelationalStructure& r) {
    if (r.arities() != gamma.arities()) throw SignatureError("lift_language: signature mismatch");
    check_source(r);
    LiftedValuedLanguage l;
    l.base_domain = gamma.domain_size;
    l.variable_count = r.domain_size;
    l.info = lifted_layout(r);
    const auto n = gamma.domain_size * r.domain_size;
    l.lifted.name = gamma.name + "_lifted";
    l.lifted.domain_size = n;
    for (const auto& li : l.info) {
        CostFunction f(lifted_relation_name(li), n, li.scope.size());
        if (li.base == no_base_relation) {
            for (Element a = 0; a < gamma.domain_size; ++a)
                f.set({static_cast<Element>(li.scope[0] * gamma.domain_size + a)}, CostValue(0));
        } else {
            const auto& base = gamma.functions[li.base];
            Tuple y(li.scope.size(), 0), x(li.scope.size());
            do {
                for (std::size_t j = 0; j < y.size(); ++j)
                    x[j] = static_cast<Element>(li.scope[j] * gamma.domain_size + y[j]);
                f.set(x, base(y));
            } while (!y.empty() && detail::next_tuple(y, static_cast<Element>(gamma.domain_size)));
        }
        l.lifted.functions.push_back(std::move(f));
    }
    return l;
}

// Instance of CSP(Gamma_R) over variable set V: singleton scopes {(v)} for each
// lifted relation, which pins every variable to its own block.
inline RelationalStructure canonical_instance(const RelationalStructure& r) {
    check_source(r);
    RelationalStructure c;
    c.name = r.name + "_canonical";
    c.domain_size = r.domain_size;
    for (const auto& li : lifted_layout(r)) c.relations.emplace_back(lifted_relation_name(li), li.scope.size(), std::vector<Tuple>{li.scope});
    return c;
}

struct MultiSortedRelation {
    std::string name;
    std::vector<std::size_t> signature;
    std::vector<Tuple> tuples;  // sort-local values
};

struct MultiSortedConstraint {
    Tuple scope;
    std::size_t relation = 0;
};

struct MultiSortedInstance {
    std::size_t variable_count = 0;
    std::vector<std::size_t> delta;
    std::vector<MultiSortedRelation> relations;
    std::vector<MultiSortedConstraint> constraints;

    void validate(std::span<const std::size_t> sort_sizes) const {
        if (delta.size() != variable_count) throw SignatureError("multi-sorted instance: domain function is not total");
        for (auto s : delta)
            if (s >= sort_sizes.size()) throw SignatureError("multi-sorted instance: unknown sort");
        for (const auto& rel : relations)
            for (const auto& t : rel.tuples) {
                if (t.size() != rel.signature.size()) throw SignatureError("multi-sorted relation '" + rel.name + "': tuple length");
                for (std::size_t j = 0; j < t.size(); ++j)
                    if (rel.signature[j] >= sort_sizes.size() || t[j] >= sort_sizes[rel.signature[j]])
                        throw SignatureError("multi-sorted relation '" + rel.name + "': entry outside its sort");
            }
        for (const auto& c : constraints) {
            if (c.relation >= relations.size()) throw SignatureError("multi-sorted constraint: unknown relation");
            const auto& sig = relations[c.relation].signature;
            if (c.scope.size() != sig.size()) throw SignatureError("multi-sorted constraint: scope length");
            for (std::size_t j = 0; j < sig.size(); ++j)
                if (c.scope[j] >= variable_count || delta[c.scope[j]] != sig[j])
                    throw SignatureError("multi-sorted constraint on '" + relations[c.relation].name +
                                         "': scope does not match the relation's signature");
        }
    }
};

inline std::optional<Map> solve_multisorted(const MultiSortedInstance& inst, std::span<const std::size_t> sort_sizes,
                                            SearchOptions opts = {}) {
    inst.validate(sort_sizes);
    if (inst.variable_count == 0) return Map{};
    std::vector<std::size_t> offset(sort_sizes.size() + 1, 0);
    for (std::size_t s = 0; s < sort_sizes.size(); ++s) offset[s + 1] = offset[s] + sort_sizes[s];
    const auto total = offset.back();
    std::vector<Relation> rels;
    rels.reserve(inst.relations.size());
    for (const auto& r : inst.relations) {
        std::vector<Tuple> ts;
        for (auto t : r.tuples) {
            for (std::size_t j = 0; j < t.size(); ++j) t[j] += static_cast<Element>(offset[r.signature[j]]);
            ts.push_back(std::move(t));
        }
        rels.emplace_back(r.name, r.signature.size(), std::move(ts));
    }
    std::vector<detail::Constraint> cons;
    for (const auto& c : inst.constraints) cons.push_back(detail::make_constraint(&rels[c.relation], c.scope));
    detail::Engine engine(inst.variable_count, total, std::move(cons), opts);
    for (std::size_t v = 0; v < inst.variable_count; ++v) {
        std::vector<bool> allowed(total, false);
        for (auto a = offset[inst.delta[v]]; a < offset[inst.delta[v] + 1]; ++a) allowed[a] = true;
        engine.restrict_domain(v, allowed);
    }
    auto m = engine.solve_first();
    if (!m) return std::nullopt;
    for (std::size_t v = 0; v < m->size(); ++v) (*m)[v] -= static_cast<Element>(offset[inst.delta[v]]);
    return m;
}

// ops[s] interprets the operation on sort s; all share one arity.
inline bool multisorted_polymorphism_check(std::span<const FiniteOperation> ops, const MultiSortedRelation& rho) {
    if (ops.empty()) throw SignatureError("multisorted_polymorphism_check: no interpretations");
    const auto n = ops[0].arity();
    for (const auto& f : ops)
        if (f.arity() != n) throw SignatureError("multisorted_polymorphism_check: interpretations differ in arity");
    for (auto s : rho.signature)
        if (s >= ops.size()) throw SignatureError("multisorted_polymorphism_check: relation uses an uninterpreted sort");
    const auto m = rho.signature.size();
    std::set<Tuple> members(rho.tuples.begin(), rho.tuples.end());
    if (rho.tuples.empty() && n > 0) return true;
    std::vector<std::size_t> pick(n, 0), radix(n, rho.tuples.size());
    Tuple out(m), args(n);
    do {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < n; ++k) args[k] = rho.tuples[pick[k]][j];
            out[j] = ops[rho.signature[j]](args);
        }
        if (!members.count(out)) return false;
    } while (detail::next_digits(pick, radix));
    return true;
}

// The multi-sorted reading of a lifted relation: sorts are variables of R.
inline MultiSortedRelation multisorted_view(const LiftedLanguage& l, std::size_t relation) {
    const auto& li = l.info[relation];
    MultiSortedRelation m;
    m.name = lifted_relation_name(li);
    m.signature.assign(li.scope.begin(), li.scope.end());
    if (li.base == no_base_relation) {
        for (Element a = 0; a < l.base_domain; ++a) m.tuples.push_back({a});
    } else {
        m.tuples = l.base_template.relations[li.base].tuples();
    }
    return m;
}

struct SortConflict {
    Element variable = 0;
    Element first_sort = 0;
    Element second_sort = 0;
    std::string message;
};

struct MultiSortedView {
    MultiSortedInstance instance;
    std::vector<std::size_t> sort_sizes;
    RelationalStructure projected;  // I_p over the base signature
    bool certified = false;         // is_homomorphism(I_p, R, delta)
};

// Variables never mentioned by any constraint are free; they are placed in sort 0.
inline std::variant<MultiSortedView, SortConflict> interpret_as_multisorted(const RelationalStructure& inst,
                                                                           const LiftedLanguage& l) {
    require_compatible(inst, l.structure);
    check_source(inst);
    const auto w = inst.domain_size;
    const auto nv = l.variable_count;
    // Union-find over W followed by one node per sort.
    std::vector<std::size_t> parent(w + nv);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::int64_t> sort_of_root(w + nv, -1);
    for (std::size_t s = 0; s < nv; ++s) sort_of_root[w + s] = static_cast<std::int64_t>(s);
    std::optional<SortConflict> conflict;
    for (std::size_t j = 0; j < inst.relations.size() && !conflict; ++j) {
        const auto& scope = l.info[j].scope;
        for (const auto& t : inst.relations[j].tuples()) {
            for (std::size_t k = 0; k < t.size(); ++k) {
                auto a = find(t[k]), b = find(w + scope[k]);
                if (a == b) continue;
                auto sa = sort_of_root[a], sb = sort_of_root[b];
                if (sa >= 0 && sb >= 0 && sa != sb) {
                    conflict = SortConflict{t[k], static_cast<Element>(sa), static_cast<Element>(sb),
                                            "variable " + std::to_string(t[k]) + " is forced into D_" + std::to_string(sa) +
                                                " and D_" + std::to_string(sb)};
                    break;
                }
                parent[a] = b;
                if (sa >= 0) sort_of_root[b] = sa;
            }
            if (conflict) break;
        }
    }
    if (conflict) return *conflict;
    MultiSortedView view;
    view.sort_sizes.assign(nv, l.base_domain);
    auto& ms = view.instance;
    ms.variable_count = w;
    ms.delta.resize(w);
    for (std::size_t x = 0; x < w; ++x) {
        auto s = sort_of_root[find(x)];
        if (s < 0 && nv == 0)
            return SortConflict{static_cast<Element>(x), 0, 0, "variable " + std::to_string(x) + " has no sort available"};
        ms.delta[x] = s < 0 ? 0 : static_cast<std::size_t>(s);
    }
    for (std::size_t j = 0; j < l.info.size(); ++j) ms.relations.push_back(multisorted_view(l, j));
    std::vector<std::vector<Tuple>> proj(l.base_input.relations.size());
    for (std::size_t j = 0; j < inst.relations.size(); ++j)
        for (const auto& t : inst.relations[j].tuples()) {
            ms.constraints.push_back({t, j});
            if (l.info[j].base != no_base_relation) proj[l.info[j].base].push_back(t);
        }
    view.projected.name = inst.name + "_projected";
    view.projected.domain_size = w;
    for (std::size_t i = 0; i < proj.size(); ++i)
        view.projected.relations.emplace_back(l.base_input.relations[i].name(), l.base_input.relations[i].arity(),
                                              std::move(proj[i]));
    Map delta(ms.delta.begin(), ms.delta.end());
    view.certified = is_homomorphism(view.projected, l.base_input, delta);
    return view;
}

} // namespace csplift
