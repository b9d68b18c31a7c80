#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "csplift/audit.hpp"
#include "csplift/io.hpp"

namespace {

using namespace csplift;

struct Options {
    std::string format = "text";
    std::uint64_t seed = 0;
    std::uint64_t max_nodes = 0;
    std::string input, tmpl, algebras, output, certificates, check_bipartite;
    std::size_t cases = 20;
    std::size_t samples = 1000;
    bool find_multimorphisms = false;
    bool gamma_prime_c = false;
};

SearchOptions search_options(const Options& o) {
    SearchOptions s;
    if (o.max_nodes) s.max_nodes = o.max_nodes;
    return s;
}

json map_json(std::span<const Element> m) { return json(std::vector<Element>(m.begin(), m.end())); }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

Report run_solve(const Options& o) {
    Report rep{"solve", {{"input", o.input}, {"template", o.tmpl}}};
    auto r = io::load_structure(o.input);
    auto t = io::load_structure(o.tmpl);
    auto h = find_homomorphism(r, t, search_options(o));
    json rec{{"verdict", h ? "found" : "absent"}};
    if (h) {
        rec["map"] = map_json(*h);
        if (!o.output.empty()) write_file(o.output, io::to_text(*h, [](std::ostream& s, const Map& m) { io::write_map(s, m); }));
    }
    rep.records.push_back(rec);
    return rep;
}

Report run_lift(const Options& o) {
    Report rep{"lift", {{"input", o.input}, {"template", o.tmpl}}};
    auto r = io::load_structure(o.input);
    auto t = io::load_structure(o.tmpl);
    auto l = lift_language(t, r);
    auto text = io::to_text(l, [](std::ostream& s, const LiftedLanguage& x) { io::write_lifted(s, x); });
    write_file(o.output, text);
    rep.records.push_back({{"domain", l.structure.domain_size}, {"relations", l.structure.relations.size()}, {"output", o.output}});
    return rep;
}

Report run_gamma_prime(const Options& o) {
    Report rep{"gamma-prime", {{"template", o.tmpl}, {"seed", o.seed}, {"samples", o.samples}}};
    auto t = io::load_structure(o.tmpl);
    auto gp = build_gamma_prime(t);
    rep.records.push_back({{"domain", gp.size()}});
    auto rng = audit::detail::seeded(o.seed, 11);
    for (const auto& rel : gp.structure.relations) {
        std::size_t in = 0;
        Tuple x(rel.arity());
        for (std::size_t k = 0; k < o.samples; ++k) {
            for (auto& e : x) e = static_cast<Element>(audit::pick(rng, gp.size()));
            in += rel.contains(x);
        }
        rep.records.push_back({{"relation", rel.name()}, {"arity", rel.arity()}, {"sampled", o.samples}, {"members", in}});
    }
    auto pe = constant_pair_embedding(t);
    rep.records.push_back({{"constant_pair_embedding_valid", is_homomorphism(t, pe.target.structure, pe.map)}, {"map", map_json(pe.map)}});
    if (!o.output.empty()) write_file(o.output, io::to_text(pe.map, [](std::ostream& s, const Map& m) { io::write_map(s, m); }));
    return rep;
}

Report run_gamma_b(const Options& o) {
    Report rep{"gamma-b", {{"template", o.tmpl}, {"algebras", o.algebras}}};
    auto t = io::load_structure(o.tmpl);
    auto b = io::load_algebra_set(o.algebras);
    auto gb = build_gamma_B(t, b);
    json rec{{"algebras", b.size()}, {"extending", is_extending(b)},
             {"tractable_set", to_string(is_tractable_set(b, boolean_schaefer_oracle()).overall)}};
    json sizes = json::object();
    for (const auto& r : gb.relations) sizes[r.name()] = r.is_lazy() ? json("lazy") : json(r.size());
    rec["relation_sizes"] = sizes;
    if (is_extending(b)) {
        auto h = extending_embedding(t, b);
        rec["extending_embedding_valid"] = is_homomorphism(t, gb, h);
        rec["map"] = map_json(h);
    }
    rep.records.push_back(rec);
    if (!o.output.empty()) write_file(o.output, io::to_text(gb, [](std::ostream& s, const RelationalStructure& x) { io::write_structure(s, x); }));
    return rep;
}

Report run_reduce(const Options& o) {
    Report rep{"reduce", {{"template", o.tmpl}, {"algebras", o.algebras}, {"input", o.input}, {"certificates", o.certificates}}};
    auto t = io::load_structure(o.tmpl);
    auto b = io::load_algebra_set(o.algebras);
    auto r = io::load_structure(o.input);
    auto out = reduction_pipeline(t, b, r, boolean_schaefer_oracle(), search_options(o));
    json rec{{"verdict", out.member ? "member" : "not-member"}, {"decided_at_step", out.decided_at_step},
             {"tractable_set", to_string(out.tractability.overall)}, {"direct", out.direct_member},
             {"agrees_with_direct", out.agrees_with_direct}};
    if (out.assignment) rec["map"] = map_json(*out.assignment);
    rep.records.push_back(rec);
    if (!out.agrees_with_direct)
        rep.violations.push_back({{"statement", "pipeline verdict equals direct search"}, {"input", audit::to_json(r)}});
    if (!o.certificates.empty()) {
        std::ostringstream s;
        s << "# step 1: homomorphism into Gamma^B\n";
        if (out.h) io::write_map(s, *out.h);
        else s << "# none: not a member\n";
        if (out.decided_at_step == 3) {
            s << "# step 2: multi-sorted instance, " << out.instance.constraints.size() << " constraints\n";
            for (const auto& c : out.instance.constraints) {
                s << "# constraint " << out.instance.relations[c.relation].name << " on";
                for (auto v : c.scope) s << " " << v;
                s << "\n";
            }
            s << "# step 3: " << (out.assignment ? "assignment" : "no assignment") << "\n";
            if (out.assignment) io::write_map(s, *out.assignment);
        }
        write_file(o.certificates, s.str());
    }
    return rep;
}

Report run_conservative(const Options& o) {
    Report rep{"conservative", {{"template", o.tmpl}, {"find_multimorphisms", o.find_multimorphisms},
                                {"gamma_prime_c", o.gamma_prime_c}, {"check_bipartite", o.check_bipartite}}};
    auto t = o.tmpl.empty() ? independent_set_template() : io::load_valued_template(o.tmpl);
    if (o.find_multimorphisms) {
        auto w = find_kz_multimorphisms(t);
        json rec{{"stp_mjn_certificate", w.has_value()}};
        if (w) rec["witness"] = w->describe();
        else rec["note"] = "no STP/MJN certificate";
        rep.records.push_back(rec);
    }
    if (o.gamma_prime_c) {
        auto gc = build_gamma_prime_c(t);
        rep.records.push_back({{"gamma_prime_c_domain", gc.structure.domain_size}});
    }
    if (!o.check_bipartite.empty()) {
        auto r = io::load_structure(o.check_bipartite);
        auto v = bipartite_example_check(r, lazy_search_options(search_options(o)));
        json rec{{"hom_found", v.hom_found}, {"bipartite", v.bipartite}, {"agree", v.agree}};
        if (v.hom) rec["map"] = map_json(*v.hom);
        rep.records.push_back(rec);
        if (!v.agree) rep.violations.push_back({{"statement", "bipartite iff maps to Gamma'_c"}, {"input", audit::to_json(r)}});
    }
    return rep;
}

void add_audit(Report& rep, const audit::AuditResult& a) {
    rep.records.push_back(a.to_json());
    for (auto v : a.violations) {
        v["audit"] = a.name;
        rep.violations.push_back(std::move(v));
    }
}

Report run_audit(const Options& o) {
    Report rep{"audit", {{"seed", o.seed}, {"cases", o.cases}}};
    add_audit(rep, audit::hom_oracle(o.seed, o.cases));
    add_audit(rep, audit::transport_audit(o.seed, o.cases));
    add_audit(rep, audit::outside_polymorphism_audit(o.seed, o.cases));
    add_audit(rep, audit::inside_polymorphism_audit(o.seed, o.cases));
    add_audit(rep, audit::minv_audit(o.seed, o.cases));
    add_audit(rep, audit::betweenness_audit(o.seed, o.cases));
    add_audit(rep, audit::pipeline_audit(o.seed, o.cases));
    add_audit(rep, audit::homtoG(o.seed, std::min<std::size_t>(o.cases, 20)));
    return rep;
}

Report run_examples(const Options&) {
    Report rep{"examples"};
    auto gamma = betweenness_template();
    auto ga = betweenness_alpha_template();
    {
        RelationalStructure r{"btw-fixture", 4, {}};
        r.relations.emplace_back("zero", 1, std::vector<Tuple>{{0}});
        r.relations.emplace_back("one", 1, std::vector<Tuple>{{3}});
        r.relations.emplace_back("btw", 3, std::vector<Tuple>{{0, 1, 2}, {1, 2, 3}});
        Map g{0, 0, alpha, 1};
        auto out = betweenness_example(r, g);
        bool direct = find_homomorphism(r, gamma).has_value();
        bool found = out.kind == BetweennessOutcome::Kind::found;
        json rec{{"example", "binary betweenness"}, {"algorithm", found}, {"direct", direct}, {"agree", found == direct}};
        if (found) rec["map"] = map_json(out.h);
        rep.records.push_back(rec);
        if (found != direct) rep.violations.push_back({{"example", "binary betweenness"}});
        auto hg = check_homtoG(r, gamma);
        rep.records.push_back({{"example", "siggers pair vs Gamma'"}, {"indicator", hg.admitted.has_value()},
                               {"gamma_prime", hg.hom.has_value()}, {"agree", hg.agree && hg.witnesses_valid}});
        if (!(hg.agree && hg.witnesses_valid)) rep.violations.push_back({{"example", "siggers pair vs Gamma'"}});
    }
    for (std::size_t n : {3, 4, 5}) {
        std::vector<std::pair<Element, Element>> e;
        for (Element a = 0; a < n; ++a) e.emplace_back(a, static_cast<Element>((a + 1) % n));
        auto v = bipartite_example_check(graph_instance(n, e, "C" + std::to_string(n)));
        rep.records.push_back({{"example", "bipartite C" + std::to_string(n)}, {"hom_found", v.hom_found}, {"bipartite", v.bipartite},
                               {"agree", v.agree}});
        if (!v.agree) rep.violations.push_back({{"example", "bipartite C" + std::to_string(n)}});
    }
    return rep;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-template CSP workbench: lifted languages, Siggers pairs, algebra lifts"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json-lines"}));
    app.add_option("--seed", o.seed, "Seed for randomized work");
    app.add_option("--max-nodes", o.max_nodes, "Search node cap (default from CSPLIFT_MAX_NODES)");

    auto* solve = app.add_subcommand("solve", "Search for a homomorphism input -> template");
    solve->add_option("--input", o.input)->required();
    solve->add_option("--template", o.tmpl)->required();
    solve->add_option("--output", o.output, "Write the witness as map lines");

    auto* lift = app.add_subcommand("lift", "Serialize the lifted language of a template and input");
    lift->add_option("--input", o.input)->required();
    lift->add_option("--template", o.tmpl)->required();
    lift->add_option("--output", o.output)->required();

    auto* gp = app.add_subcommand("gamma-prime", "Siggers-pair structure statistics for a Boolean template");
    gp->add_option("--template", o.tmpl)->required();
    gp->add_option("--samples", o.samples);
    gp->add_option("--embedding", o.output, "Write the constant-pair embedding as map lines");

    auto* gb = app.add_subcommand("gamma-b", "Build the algebra-lifted structure");
    gb->add_option("--template", o.tmpl)->required();
    gb->add_option("--algebras", o.algebras)->required();
    gb->add_option("--output", o.output);

    auto* red = app.add_subcommand("reduce", "Run the three-step reduction pipeline");
    red->add_option("--template", o.tmpl)->required();
    red->add_option("--algebras", o.algebras)->required();
    red->add_option("--input", o.input)->required();
    red->add_option("--certificates", o.certificates);

    auto* cons = app.add_subcommand("conservative", "Conservative valued templates");
    cons->add_option("--template", o.tmpl, "Cost file (default: independent-set template)");
    cons->add_flag("--find-multimorphisms", o.find_multimorphisms);
    cons->add_flag("--gamma-prime-c", o.gamma_prime_c);
    cons->add_option("--check-bipartite", o.check_bipartite);

    auto* aud = app.add_subcommand("audit", "Randomized theorem audits");
    aud->add_option("--cases", o.cases);

    app.add_subcommand("examples", "Run the built-in example fixtures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        auto* sub = app.get_subcommands().front();
        const auto& name = sub->get_name();
        Report rep;
        if (name == "solve") rep = run_solve(o);
        else if (name == "lift") rep = run_lift(o);
        else if (name == "gamma-prime") rep = run_gamma_prime(o);
        else if (name == "gamma-b") rep = run_gamma_b(o);
        else if (name == "reduce") rep = run_reduce(o);
        else if (name == "conservative") rep = run_conservative(o);
        else if (name == "audit") rep = run_audit(o);
        else rep = run_examples(o);
        rep.config["format"] = o.format;
        emit_report(std::cout, rep, o.format == "json-lines" ? ReportFormat::json_lines : ReportFormat::text);
        return rep.violations.empty() ? 0 : 1;
    } catch (const csplift::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const csplift::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
