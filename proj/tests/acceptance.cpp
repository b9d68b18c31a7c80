#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csplift/audit.hpp"
#include "csplift/conservative.hpp"

using namespace csplift;

namespace {

// Wall-clock budgets in seconds.
constexpr double budget_hom_oracle = 60;
constexpr double budget_homtog = 600;
constexpr double budget_pipeline = 300;
constexpr double budget_k3 = 600;

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome from_audit(const audit::AuditResult& r, std::size_t want_cases, double budget = 0) {
    bool ok = r.ok() && r.cases == want_cases && r.passed + r.skipped == r.cases;
    if (budget > 0) ok = ok && r.seconds <= budget;
    return {ok, r.to_json().dump()};
}

Outcome criterion_census() {
    auto r = audit::siggers_census();
    auto brute = audit::brute_force_siggers_census();
    std::size_t lib = enumerate_siggers_pairs(2).size();
    bool ok = r.ok() && lib == brute.first && brute.second == 2u * 32768u;
    return {ok, "enumerated=" + std::to_string(lib) + " brute=" + std::to_string(brute.first) +
                    " constant_g=" + std::to_string(brute.second)};
}

Outcome criterion_polymorphisms(std::uint64_t seed) {
    auto out = audit::outside_polymorphism_audit(seed, 100);
    auto in = audit::inside_polymorphism_audit(seed, 100);
    bool ok = out.ok() && in.ok() && out.cases == 100 && in.cases == 100 && out.passed == 100 && in.passed == 100;
    return {ok, out.to_json().dump() + " " + in.to_json().dump()};
}

Outcome criterion_bipartite() {
    auto r = audit::bipartite_audit(5);
    auto cyc = [](std::size_t n) {
        std::vector<std::pair<Element, Element>> e;
        for (Element a = 0; a < n; ++a) e.emplace_back(a, static_cast<Element>((a + 1) % n));
        return bipartite_example_check(graph_instance(n, e, "C" + std::to_string(n)));
    };
    auto c3 = cyc(3), c4 = cyc(4), c5 = cyc(5);
    bool ok = r.ok() && r.passed == r.cases && c4.hom_found && !c3.hom_found && !c5.hom_found;
    return {ok, r.to_json().dump() + " C3=" + std::to_string(c3.hom_found) + " C4=" + std::to_string(c4.hom_found) +
                    " C5=" + std::to_string(c5.hom_found)};
}

Outcome criterion_k3() {
    auto t0 = std::chrono::steady_clock::now();
    auto p = find_siggers_pair_admitted(audit::clique(3));
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {!p && s <= budget_k3, std::string(p ? "pair found" : "absent") + " seconds=" + std::to_string(s)};
}

Outcome criterion_sanity() {
    std::vector<FiniteOperation> mn{boolean_ops::min2()}, none{}, nand{boolean_ops::nand2()};
    bool a = boolean_algebra_tractable(mn), b = boolean_algebra_tractable(none), c = boolean_algebra_tractable(nand);
    const auto& gc = independent_set_gamma_prime_c().structure;
    bool eq = upper_than(materialize(gc, 3'000'000), disequality_template()) &&
              upper_than(disequality_template(), gc, lazy_search_options());
    return {a && !b && c && eq, "min=" + std::to_string(a) + " none=" + std::to_string(b) + " nand=" + std::to_string(c) +
                                    " gamma_prime_c_equivalent_to_neq=" + std::to_string(eq)};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::uint64_t seed = 0;
    std::vector<int> only;
    app.add_option("--seed", seed);
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, [&] { return from_audit(audit::hom_oracle(seed, 200), 200, budget_hom_oracle); }},
        {2, [&] { return from_audit(audit::homtoG(seed, 20, 4), 20, budget_homtog); }},
        {3, [&] {
             auto r = audit::embeddings();
             auto o = from_audit(r, r.cases);
             o.pass = o.pass && r.cases >= 10 && r.passed == r.cases;
             return o;
         }},
        {4, criterion_census},
        {5, [&] { return from_audit(audit::transport_audit(seed, 100), 500); }},
        {6, [&] { return criterion_polymorphisms(seed); }},
        {7, [&] { return from_audit(audit::minv_audit(seed, 10), 10); }},
        {8, [&] { return from_audit(audit::pipeline_audit(seed, 30, 4), 30, budget_pipeline); }},
        {9, [&] { return from_audit(audit::betweenness_audit(seed, 50), 50); }},
        {10, criterion_bipartite},
        {11, criterion_k3},
        {12, criterion_sanity},
    };

    int failures = 0;
    for (const auto& [id, run] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %d: %s %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
