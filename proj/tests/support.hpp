#pragma once

#include <functional>
#include <random>
#include <vector>

#include "csplift/relational.hpp"

namespace testsupport {

using csplift::Element;
using csplift::Map;
using csplift::RelationalStructure;
using csplift::Tuple;

inline RelationalStructure graph(std::string name, std::size_t n, std::vector<std::pair<Element, Element>> edges, bool symmetric = true) {
    std::vector<Tuple> e;
    for (auto [a, b] : edges) {
        e.push_back({a, b});
        if (symmetric) e.push_back({b, a});
    }
    RelationalStructure s{std::move(name), n, {}};
    s.relations.emplace_back("e", 2, std::move(e));
    return s;
}

inline RelationalStructure k(std::size_t n) {
    std::vector<std::pair<Element, Element>> e;
    for (Element a = 0; a < n; ++a)
        for (Element b = a + 1; b < n; ++b) e.emplace_back(a, b);
    return graph("K" + std::to_string(n), n, e);
}

inline RelationalStructure c(std::size_t n) {
    std::vector<std::pair<Element, Element>> e;
    for (Element a = 0; a < n; ++a) e.emplace_back(a, static_cast<Element>((a + 1) % n));
    return graph("C" + std::to_string(n), n, e);
}

// Straight odometer over all maps; deliberately shares nothing with the solver.
inline void for_each_map(std::size_t n, std::size_t d, const std::function<void(const Map&)>& f) {
    Map m(n, 0);
    if (n == 0) {
        f(m);
        return;
    }
    if (d == 0) return;
    while (true) {
        f(m);
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++m[i] < d) break;
            m[i] = 0;
            if (i == 0) return;
        }
    }
}

inline bool maps_into(const RelationalStructure& r, const RelationalStructure& t, const Map& m) {
    for (std::size_t i = 0; i < r.relations.size(); ++i)
        for (const auto& tup : r.relations[i].tuples()) {
            Tuple img;
            for (auto x : tup) img.push_back(m[x]);
            bool hit = false;
            for (const auto& u : t.relations[i].tuples()) hit = hit || u == img;
            if (!hit) return false;
        }
    return true;
}

inline std::vector<Map> all_homs(const RelationalStructure& r, const RelationalStructure& t) {
    std::vector<Map> out;
    for_each_map(r.domain_size, t.domain_size, [&](const Map& m) {
        if (maps_into(r, t, m)) out.push_back(m);
    });
    return out;
}

inline RelationalStructure random_structure(std::mt19937_64& rng, std::string name, std::size_t n, const std::vector<std::size_t>& arities,
                                            double density) {
    std::bernoulli_distribution coin(density);
    RelationalStructure s{std::move(name), n, {}};
    for (std::size_t i = 0; i < arities.size(); ++i) {
        std::vector<Tuple> ts;
        Map t(arities[i], 0);
        for_each_map(arities[i], n, [&](const Map& x) {
            if (coin(rng)) ts.push_back(x);
        });
        s.relations.emplace_back("r" + std::to_string(i), arities[i], std::move(ts));
    }
    return s;
}

} // namespace testsupport
