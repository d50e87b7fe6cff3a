#pragma once

// Source positions for nlohmann::json documents. The library does not keep
// offsets, so the text is scanned once more through its SAX interface with
// an input iterator that reports how far the lexer has read.

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "valence/diagnostics.hpp"

namespace valence::detail {

class SourceMap {
public:
    SourceMap() = default;
    explicit SourceMap(std::string_view text);

    void record_value(const std::string& pointer, std::size_t offset) { values_[pointer] = offset; }

    /// Location of the value at `pointer`, or of its nearest recorded ancestor.
    [[nodiscard]] Location locate(const std::string& pointer) const;

    /// Location of a character inside the string value at `pointer`
    /// (`inner` counts bytes after the opening quote).
    [[nodiscard]] Location locate_inside(const std::string& pointer, int inner) const;

    [[nodiscard]] Location at_offset(std::size_t offset, std::string pointer) const;

private:
    std::vector<std::size_t> line_starts_{0};
    std::unordered_map<std::string, std::size_t> values_;
};

struct LocatedJson {
    nlohmann::json value;
    SourceMap map;
};

/// Parses `text`; a syntax error comes back as a located Diagnostic.
std::variant<LocatedJson, Diagnostic> parse_located(std::string_view text);

std::string pointer_append(const std::string& parent, std::string_view key);
std::string pointer_append(const std::string& parent, std::size_t index);

}  // namespace valence::detail
