#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace csplift {

using json = nlohmann::ordered_json;

enum class ReportFormat { text, json_lines };

struct Report {
    Report() = default;
    explicit Report(std::string sub, json cfg = json::object()) : subcommand(std::move(sub)), config(std::move(cfg)) {}

    std::string subcommand;
    json config = json::object();
    std::vector<json> records;
    std::vector<json> violations;
};

namespace detail {
inline void text_value(std::ostream& out, const std::string& indent, const std::string& key, const json& v) {
    if (key == "map" && v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) out << indent << "map " << i << " " << v[i].dump() << "\n";
        return;
    }
    if (v.is_object()) {
        out << indent << key << ":\n";
        for (const auto& [k, x] : v.items()) text_value(out, indent + "  ", k, x);
        return;
    }
    out << indent << key << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
}
} // namespace detail

inline void emit_report(std::ostream& out, const Report& r, ReportFormat f) {
    if (f == ReportFormat::json_lines) {
        out << json{{"type", "header"}, {"subcommand", r.subcommand}, {"config", r.config}}.dump() << "\n";
        for (const auto& rec : r.records) {
            json line{{"type", "result"}};
            for (const auto& [k, v] : rec.items()) line[k] = v;
            out << line.dump() << "\n";
        }
        for (const auto& v : r.violations) {
            json line{{"type", "violation"}};
            for (const auto& [k, x] : v.items()) line[k] = x;
            out << line.dump() << "\n";
        }
        return;
    }
    out << "# csplift " << r.subcommand << "\n";
    for (const auto& [k, v] : r.config.items()) detail::text_value(out, "# ", k, v);
    for (const auto& rec : r.records) {
        out << "\n";
        for (const auto& [k, v] : rec.items()) detail::text_value(out, "", k, v);
    }
    for (const auto& v : r.violations) {
        out << "\nTHEOREM VIOLATION\n";
        for (const auto& [k, x] : v.items()) detail::text_value(out, "  ", k, x);
    }
}

} // namespace csplift
