#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace valence {

enum class Severity { error, warning };

/// A JSON pointer into the document plus the 1-based line/column it maps to.
struct Location {
    std::string path;
    int line = 0;
    int column = 0;
};

struct Diagnostic {
    Severity severity = Severity::error;
    std::string code;
    std::string message;
    Location location;
};

inline bool has_errors(std::span<const Diagnostic> diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::error; });
}

/// "file:3:14: error[unknown-level]: message (at /actions/0/effects/1/when)"
std::string format_diagnostic(const Diagnostic& d, const std::string& file = {});

/// Outcome of reading a document: a value when there were no errors, and
/// every diagnostic (warnings included) either way.
template <class T>
struct ParseResult {
    std::optional<T> value;
    std::vector<Diagnostic> diagnostics;

    [[nodiscard]] bool ok() const { return value.has_value(); }
};

}  // namespace valence
