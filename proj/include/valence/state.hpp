#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace valence {

/// A scenario variable with an ordered, finite domain. A level's position in
/// `levels` is its numeric value in expressions.
struct VariableDef {
    std::string name;
    std::vector<std::string> levels;

    [[nodiscard]] int level_index(std::string_view level) const {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i] == level) return static_cast<int>(i);
        return -1;
    }
    [[nodiscard]] int size() const { return static_cast<int>(levels.size()); }

    friend bool operator==(const VariableDef&, const VariableDef&) = default;
};

/// One domain index per scenario variable, in scenario variable order.
struct StateVector {
    std::vector<int> levels;

    StateVector() = default;
    explicit StateVector(std::vector<int> l) : levels(std::move(l)) {}
    StateVector(std::initializer_list<int> l) : levels(l) {}

    [[nodiscard]] int operator[](std::size_t i) const { return levels[i]; }
    int& operator[](std::size_t i) { return levels[i]; }
    [[nodiscard]] std::size_t size() const { return levels.size(); }

    friend bool operator==(const StateVector&, const StateVector&) = default;
    friend auto operator<=>(const StateVector&, const StateVector&) = default;
};

}  // namespace valence
