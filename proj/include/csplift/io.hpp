#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "algebra.hpp"
#include "cost.hpp"
#include "lifted.hpp"

namespace csplift::io {

struct ParsedFile {
    std::vector<RelationalStructure> structures;
    std::vector<FiniteOperation> operations;
    std::vector<Algebra> algebras;
    std::vector<CostFunction> costs;
    std::vector<std::pair<Element, Element>> map_lines;
};

namespace detail {

struct Line {
    std::size_t number = 0;
    std::vector<std::string> tokens;
};

inline std::vector<Line> tokenize(std::istream& in) {
    std::vector<Line> out;
    std::string raw;
    std::size_t n = 0;
    while (std::getline(in, raw)) {
        ++n;
        if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
        std::istringstream ss(raw);
        Line l{n, {}};
        std::string tok;
        while (ss >> tok) l.tokens.push_back(tok);
        if (!l.tokens.empty()) out.push_back(std::move(l));
    }
    return out;
}

class Cursor {
public:
    Cursor(std::string file, std::vector<Line> lines) : file_(std::move(file)), lines_(std::move(lines)) {}

    bool done() const { return pos_ >= lines_.size(); }
    const Line& peek() const { return lines_[pos_]; }
    const Line& next() {
        if (done()) fail_eof();
        return lines_[pos_++];
    }
    [[noreturn]] void fail(const Line& l, const std::string& what) const { throw ParseError(file_, l.number, what); }
    [[noreturn]] void fail_eof() const {
        throw ParseError(file_, lines_.empty() ? 0 : lines_.back().number, "unexpected end of file, expected 'end'");
    }

    std::uint64_t integer(const Line& l, const std::string& tok, const char* what) const {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail(l, std::string("expected ") + what + ", got '" + tok + "'");
        return v;
    }

    const Line& expect(const std::string& keyword, std::size_t ntokens) {
        const auto& l = next();
        if (l.tokens[0] != keyword || l.tokens.size() != ntokens)
            fail(l, "expected '" + keyword + "' line with " + std::to_string(ntokens - 1) + " argument(s)");
        return l;
    }

    const std::string& file() const { return file_; }

private:
    std::string file_;
    std::vector<Line> lines_;
    std::size_t pos_ = 0;
};

inline std::string tuple_text(std::span<const Element> t) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + std::to_string(t[i]);
    return s;
}

inline RelationalStructure parse_structure(Cursor& c) {
    const auto& head = c.expect("structure", 2);
    RelationalStructure s;
    s.name = head.tokens[1];
    const auto& dl = c.expect("domain", 2);
    s.domain_size = c.integer(dl, dl.tokens[1], "domain size");
    std::map<std::string, Element> names;
    if (!c.done() && c.peek().tokens[0] == "elements") {
        const auto& el = c.next();
        if (el.tokens.size() != s.domain_size + 1) c.fail(el, "'elements' must list exactly " + std::to_string(s.domain_size) + " names");
        for (std::size_t i = 1; i < el.tokens.size(); ++i)
            if (!names.emplace(el.tokens[i], static_cast<Element>(i - 1)).second) c.fail(el, "duplicate element name '" + el.tokens[i] + "'");
    }
    auto element = [&](const Line& l, const std::string& tok) -> Element {
        if (!names.empty()) {
            auto it = names.find(tok);
            if (it == names.end()) c.fail(l, "unknown element '" + tok + "'");
            return it->second;
        }
        auto v = c.integer(l, tok, "element");
        if (v >= s.domain_size) c.fail(l, "element " + tok + " outside domain of size " + std::to_string(s.domain_size));
        return static_cast<Element>(v);
    };
    std::set<std::string> seen;
    while (true) {
        const auto& l = c.next();
        if (l.tokens[0] == "end") {
            if (l.tokens.size() != 1) c.fail(l, "'end' takes no arguments");
            break;
        }
        if (l.tokens[0] != "relation" || l.tokens.size() != 3) c.fail(l, "expected 'relation <name> <arity>' or 'end'");
        const auto& rname = l.tokens[1];
        if (!seen.insert(rname).second) c.fail(l, "duplicate relation name '" + rname + "'");
        const auto arity = c.integer(l, l.tokens[2], "arity");
        std::vector<Tuple> tuples;
        while (!c.done() && c.peek().tokens[0] != "relation" && c.peek().tokens[0] != "end") {
            const auto& tl = c.next();
            if (tl.tokens.size() != arity) c.fail(tl, "tuple of relation '" + rname + "' needs " + std::to_string(arity) + " entries");
            Tuple t;
            for (const auto& tok : tl.tokens) t.push_back(element(tl, tok));
            tuples.push_back(std::move(t));
        }
        s.relations.emplace_back(rname, arity, std::move(tuples));
    }
    return s;
}

inline std::vector<Element> parse_rows(Cursor& c, const Line& head, std::size_t d, std::size_t arity, const std::string& what) {
    const auto rows = csplift::detail::pow_or_throw(d, arity, "operation table");
    std::vector<Element> table(rows, 0);
    std::vector<bool> have(rows, false);
    Tuple t(arity);
    while (!c.done() && c.peek().tokens[0] != "end" && c.peek().tokens[0] != "op") {
        const auto& l = c.next();
        if (l.tokens.size() != arity + 1) c.fail(l, what + ": row needs " + std::to_string(arity) + " arguments and a value");
        for (std::size_t j = 0; j < arity; ++j) {
            auto v = c.integer(l, l.tokens[j], "argument");
            if (v >= d) c.fail(l, what + ": argument " + l.tokens[j] + " outside domain");
            t[j] = static_cast<Element>(v);
        }
        auto v = c.integer(l, l.tokens[arity], "value");
        if (v >= d) c.fail(l, what + ": value " + l.tokens[arity] + " outside domain");
        auto idx = csplift::detail::encode(t, d);
        if (have[idx]) c.fail(l, what + ": duplicate row for (" + tuple_text(t) + ")");
        have[idx] = true;
        table[idx] = static_cast<Element>(v);
    }
    for (std::uint64_t i = 0; i < rows; ++i)
        if (!have[i]) {
            csplift::detail::decode(i, d, t);
            c.fail(head, what + ": missing row for argument tuple (" + tuple_text(t) + ")");
        }
    return table;
}

inline FiniteOperation parse_operation(Cursor& c) {
    const auto& head = c.expect("operation", 4);
    auto d = c.integer(head, head.tokens[2], "domain size");
    auto n = c.integer(head, head.tokens[3], "arity");
    auto table = parse_rows(c, head, d, n, "operation '" + head.tokens[1] + "'");
    c.expect("end", 1);
    return FiniteOperation(head.tokens[1], d, n, std::move(table));
}

inline Algebra parse_algebra(Cursor& c) {
    const auto& head = c.expect("algebra", 2);
    Algebra a;
    a.name = head.tokens[1];
    const auto& sl = c.next();
    if (sl.tokens[0] != "signature" || sl.tokens.size() < 2) c.fail(sl, "expected 'signature <n_1> ... <n_k>'");
    for (std::size_t i = 1; i < sl.tokens.size(); ++i) a.signature.push_back(c.integer(sl, sl.tokens[i], "arity"));
    const auto& dl = c.expect("domain", 2);
    a.domain_size = c.integer(dl, dl.tokens[1], "domain size");
    std::vector<std::optional<FiniteOperation>> ops(a.signature.size());
    while (true) {
        const auto& l = c.next();
        if (l.tokens[0] == "end") break;
        if (l.tokens[0] != "op" || l.tokens.size() != 2) c.fail(l, "expected 'op <i>' or 'end'");
        auto i = c.integer(l, l.tokens[1], "symbol index");
        if (i >= ops.size()) c.fail(l, "symbol index " + l.tokens[1] + " outside the signature");
        if (ops[i]) c.fail(l, "duplicate block for symbol " + l.tokens[1]);
        auto table = parse_rows(c, l, a.domain_size, a.signature[i], "algebra '" + a.name + "' symbol " + l.tokens[1]);
        ops[i] = FiniteOperation("o" + std::to_string(i), a.domain_size, a.signature[i], std::move(table));
    }
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (!ops[i]) c.fail(head, "algebra '" + a.name + "' lacks a block for symbol " + std::to_string(i));
        a.ops.push_back(std::move(*ops[i]));
    }
    return a;
}

inline CostValue parse_cost_value(const Cursor& c, const Line& l, const std::string& tok) {
    if (tok == "inf") return CostValue::infinity();
    auto slash = tok.find('/');
    auto num_text = tok.substr(0, slash);
    bool neg = !num_text.empty() && num_text[0] == '-';
    auto n = c.integer(l, neg ? num_text.substr(1) : num_text, "cost numerator or 'inf'");
    std::uint64_t den = 1;
    if (slash != std::string::npos) den = c.integer(l, tok.substr(slash + 1), "cost denominator");
    if (den == 0) c.fail(l, "zero denominator");
    if (n > static_cast<std::uint64_t>(INT64_MAX) || den > static_cast<std::uint64_t>(INT64_MAX)) c.fail(l, "cost out of range");
    auto sn = static_cast<std::int64_t>(n);
    return CostValue(Rational(neg ? -sn : sn, static_cast<std::int64_t>(den)));
}

inline CostFunction parse_cost(Cursor& c) {
    const auto& head = c.expect("cost", 4);
    auto d = c.integer(head, head.tokens[2], "domain size");
    auto n = c.integer(head, head.tokens[3], "arity");
    CostFunction f(head.tokens[1], d, n);
    std::vector<bool> have(f.table_size(), false);
    Tuple t(n);
    while (true) {
        const auto& l = c.next();
        if (l.tokens[0] == "end" && l.tokens.size() == 1) break;
        if (l.tokens.size() != n + 1) c.fail(l, "cost row needs " + std::to_string(n) + " arguments and a value");
        for (std::size_t j = 0; j < n; ++j) {
            auto v = c.integer(l, l.tokens[j], "argument");
            if (v >= d) c.fail(l, "argument " + l.tokens[j] + " outside domain");
            t[j] = static_cast<Element>(v);
        }
        auto idx = csplift::detail::encode(t, d);
        if (have[idx]) c.fail(l, "duplicate cost row for (" + tuple_text(t) + ")");
        have[idx] = true;
        f.set(t, parse_cost_value(c, l, l.tokens[n]));
    }
    return f;
}

} // namespace detail

inline ParsedFile parse_stream(std::istream& in, const std::string& file) {
    detail::Cursor c(file, detail::tokenize(in));
    ParsedFile out;
    std::set<std::string> names;
    auto unique = [&](const detail::Line& l, const std::string& kind, const std::string& name) {
        if (!names.insert(kind + ":" + name).second) c.fail(l, "duplicate " + kind + " name '" + name + "'");
    };
    while (!c.done()) {
        const auto& l = c.peek();
        const auto& kw = l.tokens[0];
        if (kw == "structure") {
            auto line = l;
            out.structures.push_back(detail::parse_structure(c));
            unique(line, kw, out.structures.back().name);
        } else if (kw == "operation") {
            auto line = l;
            out.operations.push_back(detail::parse_operation(c));
            unique(line, kw, out.operations.back().name());
        } else if (kw == "algebra") {
            auto line = l;
            out.algebras.push_back(detail::parse_algebra(c));
            unique(line, kw, out.algebras.back().name);
        } else if (kw == "cost") {
            auto line = l;
            out.costs.push_back(detail::parse_cost(c));
            unique(line, kw, out.costs.back().name());
        } else if (kw == "map") {
            const auto& ml = c.next();
            if (ml.tokens.size() != 3) c.fail(ml, "expected 'map <src> <dst-index>'");
            out.map_lines.emplace_back(static_cast<Element>(c.integer(ml, ml.tokens[1], "source element")),
                                       static_cast<Element>(c.integer(ml, ml.tokens[2], "target index")));
        } else {
            c.fail(l, "expected 'structure', 'operation', 'algebra', 'cost' or 'map', got '" + kw + "'");
        }
    }
    return out;
}

inline ParsedFile parse_text(const std::string& text, const std::string& file = "<string>") {
    std::istringstream in(text);
    return parse_stream(in, file);
}

inline ParsedFile parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    return parse_stream(in, path.string());
}

namespace detail {
template <class T>
const T& only_one(const std::vector<T>& v, const std::string& file, const char* kind) {
    if (v.size() != 1) throw ParseError(file, 0, std::string("expected exactly one ") + kind + ", found " + std::to_string(v.size()));
    return v.front();
}
} // namespace detail

inline RelationalStructure load_structure(const std::filesystem::path& p) {
    return detail::only_one(parse_file(p).structures, p.string(), "structure");
}
inline FiniteOperation load_operation(const std::filesystem::path& p) {
    return detail::only_one(parse_file(p).operations, p.string(), "operation");
}

inline AlgebraSet load_algebra_set(const std::filesystem::path& p) {
    auto parsed = parse_file(p);
    if (parsed.algebras.empty()) throw ParseError(p.string(), 0, "no algebra blocks");
    AlgebraSet set(parsed.algebras[0].signature, parsed.algebras[0].domain_size);
    for (auto& a : parsed.algebras) {
        auto name = a.name;
        try {
            if (!set.add(std::move(a))) throw ParseError(p.string(), 0, "algebra '" + name + "' duplicates an earlier algebra");
        } catch (const SignatureError& e) {
            throw ParseError(p.string(), 0, e.what());
        }
    }
    return set;
}

// Every cost block in the file, in order, forms the template.
inline ValuedTemplate load_valued_template(const std::filesystem::path& p) {
    auto parsed = parse_file(p);
    if (parsed.costs.empty()) throw ParseError(p.string(), 0, "no cost blocks");
    ValuedTemplate t{p.stem().string(), parsed.costs[0].domain_size(), parsed.costs};
    for (const auto& f : t.functions)
        if (f.domain_size() != t.domain_size) throw ParseError(p.string(), 0, "cost functions disagree on the domain size");
    return t;
}

inline Map load_map(const std::filesystem::path& p, std::size_t source_size) {
    auto parsed = parse_file(p);
    Map m(source_size, 0);
    std::vector<bool> have(source_size, false);
    for (auto [s, t] : parsed.map_lines) {
        if (s >= source_size || have[s]) throw ParseError(p.string(), 0, "map source " + std::to_string(s) + " out of range or repeated");
        have[s] = true;
        m[s] = t;
    }
    for (std::size_t i = 0; i < source_size; ++i)
        if (!have[i]) throw ParseError(p.string(), 0, "map lacks source " + std::to_string(i));
    return m;
}

// ---- serialization ----

inline void write_structure(std::ostream& out, const RelationalStructure& s) {
    out << "structure " << s.name << "\ndomain " << s.domain_size << "\n";
    for (const auto& r : s.relations) {
        out << "relation " << r.name() << " " << r.arity() << "\n";
        for (const auto& t : r.tuples()) out << detail::tuple_text(t) << "\n";
    }
    out << "end\n";
}

inline void write_rows(std::ostream& out, const FiniteOperation& f) {
    Tuple t(f.arity());
    for (std::uint64_t i = 0; i < f.table().size(); ++i) {
        csplift::detail::decode(i, f.domain_size(), t);
        if (!t.empty()) out << detail::tuple_text(t) << " ";
        out << f.at(i) << "\n";
    }
}

inline void write_operation(std::ostream& out, const FiniteOperation& f) {
    out << "operation " << f.name() << " " << f.domain_size() << " " << f.arity() << "\n";
    write_rows(out, f);
    out << "end\n";
}

inline void write_algebra(std::ostream& out, const Algebra& a) {
    out << "algebra " << a.name << "\nsignature";
    for (auto n : a.signature) out << " " << n;
    out << "\ndomain " << a.domain_size << "\n";
    for (std::size_t i = 0; i < a.ops.size(); ++i) {
        out << "op " << i << "\n";
        write_rows(out, a.ops[i]);
    }
    out << "end\n";
}

// Infinite entries are left implicit.
inline void write_cost(std::ostream& out, const CostFunction& f) {
    out << "cost " << f.name() << " " << f.domain_size() << " " << f.arity() << "\n";
    Tuple t(f.arity());
    for (std::uint64_t i = 0; i < f.table_size(); ++i) {
        if (f.at(i).is_infinite()) continue;
        csplift::detail::decode(i, f.domain_size(), t);
        if (!t.empty()) out << detail::tuple_text(t) << " ";
        out << f.at(i).str() << "\n";
    }
    out << "end\n";
}

inline void write_map(std::ostream& out, std::span<const Element> m) {
    for (std::size_t i = 0; i < m.size(); ++i) out << "map " << i << " " << m[i] << "\n";
}

inline void write_lifted(std::ostream& out, const LiftedLanguage& l) {
    out << "# encoding d(v,a)=v*|D|+a with |D|=" << l.base_domain << "\n";
    write_structure(out, l.structure);
}

template <class T, class W>
std::string to_text(const T& x, W writer) {
    std::ostringstream ss;
    writer(ss, x);
    return ss.str();
}

} // namespace csplift::io
