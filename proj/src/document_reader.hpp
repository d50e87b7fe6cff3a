#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "json_locator.hpp"
#include "valence/diagnostics.hpp"
#include "valence/expr.hpp"

namespace valence::detail {

/// Shared plumbing for the JSON document readers: typed field access that
/// records located diagnostics instead of throwing.
class DocumentReader {
public:
    using json = nlohmann::json;

    explicit DocumentReader(const SourceMap& map) : map_(map) {}

    std::vector<Diagnostic> diagnostics;

    void error(std::string code, std::string message, const std::string& pointer) {
        diagnostics.push_back({Severity::error, std::move(code), std::move(message), map_.locate(pointer)});
    }
    void warning(std::string code, std::string message, const std::string& pointer) {
        diagnostics.push_back({Severity::warning, std::move(code), std::move(message), map_.locate(pointer)});
    }

    [[nodiscard]] bool failed() const { return has_errors(diagnostics); }

    const json* field(const json& obj, const char* key, const std::string& pointer, bool required) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) error("missing-field", std::string("missing required field '") + key + "'", pointer);
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> string_field(const json& obj, const char* key, const std::string& pointer,
                                            bool required) {
        const json* v = field(obj, key, pointer, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            error("type", std::string("field '") + key + "' must be a string", pointer_append(pointer, key));
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<long long> integer_field(const json& obj, const char* key, const std::string& pointer,
                                           bool required) {
        const json* v = field(obj, key, pointer, required);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) {
            error("type", std::string("field '") + key + "' must be an integer", pointer_append(pointer, key));
            return std::nullopt;
        }
        return v->get<long long>();
    }

    const json* array_field(const json& obj, const char* key, const std::string& pointer, bool required) {
        const json* v = field(obj, key, pointer, required);
        if (!v) return nullptr;
        if (!v->is_array()) {
            error("type", std::string("field '") + key + "' must be an array", pointer_append(pointer, key));
            return nullptr;
        }
        return v;
    }

    const json* object_field(const json& obj, const char* key, const std::string& pointer, bool required) {
        const json* v = field(obj, key, pointer, required);
        if (!v) return nullptr;
        if (!v->is_object()) {
            error("type", std::string("field '") + key + "' must be an object", pointer_append(pointer, key));
            return nullptr;
        }
        return v;
    }

    bool expect_object(const json& v, const std::string& pointer) {
        if (v.is_object()) return true;
        error("type", "expected an object", pointer);
        return false;
    }

    /// Parses the expression held in the string at `pointer`.
    std::optional<Expr> expression(const std::string& text, const std::string& pointer,
                                   std::span<const VariableDef> variables, ExprType expected) {
        try {
            Expr e = Expr::parse(text, variables);
            if (e.type() != expected) {
                error("type-error",
                      expected == ExprType::boolean ? "expected a boolean condition" : "expected a numeric expression",
                      pointer);
                return std::nullopt;
            }
            return e;
        } catch (const ExprError& ex) {
            diagnostics.push_back({Severity::error, ex.code(), ex.what(), map_.locate_inside(pointer, ex.offset())});
            return std::nullopt;
        }
    }

    /// Optional boolean guard stored under `key`; absent means "always".
    bool guard_field(const json& obj, const char* key, const std::string& pointer,
                     std::span<const VariableDef> variables, std::optional<Expr>& out) {
        auto text = string_field(obj, key, pointer, false);
        if (!text) return !obj.contains(key);
        auto e = expression(*text, pointer_append(pointer, key), variables, ExprType::boolean);
        if (!e) return false;
        out = std::move(*e);
        return true;
    }

    [[nodiscard]] const SourceMap& map() const { return map_; }

private:
    const SourceMap& map_;
};

inline bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(s[0])) return false;
    for (char c : s)
        if (!alpha(c) && !digit(c)) return false;
    return s != "and" && s != "or" && s != "not" && s != "true" && s != "false";
}

inline bool is_level_name(const std::string& s) {
    if (is_identifier(s)) return true;
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

}  // namespace valence::detail
