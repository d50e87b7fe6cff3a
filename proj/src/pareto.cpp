#include "valence/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <numeric>

namespace valence {

namespace {

void check_dimensions(std::span<const ValueVector> vectors) {
    for (const auto& v : vectors)
        if (v.size() != vectors.front().size()) throw ContractViolation("value vectors of mixed dimension");
}

// Boxes [ref, p] sorted by first coordinate descending; area of the union.
double hv2(std::vector<ValueVector> pts, const ValueVector& ref) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a[0] != b[0] ? a[0] > b[0] : a[1] > b[1];
    });
    double area = 0.0;
    double top = ref[1];
    for (const auto& p : pts) {
        if (p[1] > top) {
            area += (p[0] - ref[0]) * (p[1] - top);
            top = p[1];
        }
    }
    return area;
}

// Slices along the last coordinate: between consecutive heights the
// cross-section is the (d-1)-dimensional union of the points above.
double hv_rec(std::vector<ValueVector> pts, const ValueVector& ref) {
    std::size_t d = ref.size();
    if (pts.empty()) return 0.0;
    if (d == 1) {
        double best = ref[0];
        for (const auto& p : pts) best = std::max(best, p[0]);
        return best - ref[0];
    }
    if (d == 2) return hv2(std::move(pts), ref);
    std::sort(pts.begin(), pts.end(), [d](const auto& a, const auto& b) { return a[d - 1] > b[d - 1]; });
    ValueVector sub_ref(ref.begin(), ref.end() - 1);
    double volume = 0.0;
    std::vector<ValueVector> active;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        active.emplace_back(pts[i].begin(), pts[i].end() - 1);
        double lower = i + 1 < pts.size() ? pts[i + 1][d - 1] : ref[d - 1];
        double height = pts[i][d - 1] - lower;
        if (height > 0.0) volume += height * hv_rec(active, sub_ref);
    }
    return volume;
}

}  // namespace

bool weakly_dominates(const ValueVector& v, const ValueVector& w, double tol) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] < w[i] - tol) return false;
    return true;
}

bool dominates(const ValueVector& v, const ValueVector& w) { return weakly_dominates(v, w) && v != w; }

bool lex_greater(const ValueVector& a, const ValueVector& b) {
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

double linf_distance(const ValueVector& a, const ValueVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

std::vector<std::size_t> pareto_prune_indices(std::span<const ValueVector> vectors, double tol) {
    if (vectors.empty()) return {};
    check_dimensions(vectors);
    const std::size_t dims = vectors.front().size();
    std::vector<std::size_t> order(vectors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lex_greater(vectors[a], vectors[b]); });
    auto x = [&](std::size_t pos) { return vectors[order[pos]][0]; };

    // Near-duplicate clusters collapse onto their lexicographically largest
    // member. A match can only sit within tol of the first coordinate.
    std::vector<std::size_t> alive;  // positions in `order`
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& v = vectors[order[i]];
        bool dup = false;
        for (auto j = alive.rbegin(); j != alive.rend() && !(x(*j) > v[0] + tol); ++j)
            if (linf_distance(vectors[order[*j]], v) <= tol) {
                dup = true;
                break;
            }
        if (!dup) alive.push_back(i);
    }

    // Drop every survivor that another survivor weakly dominates within tol.
    // Earlier survivors already beat v on the first coordinate; later ones
    // only count while they stay within tol of it.
    const std::size_t n = alive.size();
    auto at = [&](std::size_t k) -> const ValueVector& { return vectors[order[alive[k]]]; };
    std::vector<bool> dominated(n, false);
    if (dims == 1) {
        for (std::size_t k = 1; k < n; ++k) dominated[k] = true;
    } else if (dims == 2) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (!(best < at(k)[1] - tol)) dominated[k] = true;
            best = std::max(best, at(k)[1]);
        }
    } else if (dims == 3) {
        // Maximal (y, z) pairs seen so far: y ascending, z descending.
        std::map<double, double> stairs;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& v = at(k);
            auto hit = stairs.lower_bound(v[1] - tol);
            if (hit != stairs.end() && !(hit->second < v[2] - tol)) dominated[k] = true;
            auto above = stairs.lower_bound(v[1]);
            if (above != stairs.end() && above->second >= v[2]) continue;
            auto it = stairs.upper_bound(v[1]);
            while (it != stairs.begin()) {
                auto prev = std::prev(it);
                if (prev->second > v[2]) break;
                it = stairs.erase(prev);
            }
            stairs.emplace(v[1], v[2]);
        }
    } else {
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < k && !dominated[k]; ++j)
                dominated[k] = weakly_dominates(at(j), at(k), tol);
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (dominated[k]) continue;
        const auto& v = at(k);
        for (std::size_t j = k + 1; j < n && !(at(j)[0] < v[0] - tol); ++j)
            if (weakly_dominates(at(j), v, tol)) {
                dominated[k] = true;
                break;
            }
    }
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < n; ++k)
        if (!dominated[k]) kept.push_back(order[alive[k]]);
    return kept;
}

ParetoSet pareto_prune(std::span<const ValueVector> vectors, double tol) {
    ParetoSet out;
    for (std::size_t i : pareto_prune_indices(vectors, tol)) out.push_back(vectors[i]);
    return out;
}

double hausdorff_distance(std::span<const ValueVector> a, std::span<const ValueVector> b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto directed = [](std::span<const ValueVector> x, std::span<const ValueVector> y) {
        double worst = 0.0;
        for (const auto& p : x) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : y) best = std::min(best, linf_distance(p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

double hypervolume(std::span<const ValueVector> front, const ValueVector& reference) {
    for (const auto& v : front) {
        if (v.size() != reference.size()) throw ContractViolation("hypervolume: dimension mismatch");
        if (!weakly_dominates(v, reference)) throw ContractViolation("hypervolume: reference point is not below the front");
    }
    if (front.empty()) return 0.0;
    return hv_rec(pareto_prune(front), reference);
}

namespace {

// Two objectives: each point's exclusive area is the box between it and its
// two neighbours on the staircase, so the greedy loop only has to refresh
// the neighbours of the removed point. Empty when `front` is not a strict
// staircase (dominated members or duplicates), which the general loop handles.
std::optional<std::vector<std::size_t>> hypervolume_cap2(std::span<const ValueVector> front, std::size_t limit,
                                                         const ValueVector& ref) {
    std::size_t n = front.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lex_greater(front[a], front[b]); });
    for (std::size_t i = 1; i < n; ++i) {
        const auto& a = front[order[i - 1]];
        const auto& b = front[order[i]];
        if (!(a[0] > b[0] && a[1] < b[1])) return std::nullopt;
    }
    // Positions along the staircase: x descending, y ascending.
    std::vector<std::ptrdiff_t> prev(n), next(n);
    for (std::size_t i = 0; i < n; ++i) {
        prev[i] = static_cast<std::ptrdiff_t>(i) - 1;
        next[i] = i + 1 < n ? static_cast<std::ptrdiff_t>(i + 1) : -1;
    }
    auto at = [&](std::ptrdiff_t i) -> const ValueVector& { return front[order[static_cast<std::size_t>(i)]]; };
    auto gain = [&](std::size_t i) {
        const auto& p = at(static_cast<std::ptrdiff_t>(i));
        double right = next[i] < 0 ? ref[0] : at(next[i])[0];
        double below = prev[i] < 0 ? ref[1] : at(prev[i])[1];
        return (p[0] - right) * (p[1] - below);
    };
    // Smallest gain first; among equal gains the lexicographically smaller
    // point, which sits further along the staircase.
    std::set<std::pair<double, std::ptrdiff_t>> queue;
    std::vector<double> current(n);
    for (std::size_t i = 0; i < n; ++i) {
        current[i] = gain(i);
        queue.insert({current[i], -static_cast<std::ptrdiff_t>(i)});
    }
    std::vector<bool> alive(n, true);
    for (std::size_t left = n; left > limit; --left) {
        auto victim = static_cast<std::size_t>(-queue.begin()->second);
        queue.erase(queue.begin());
        alive[victim] = false;
        std::ptrdiff_t p = prev[victim], q = next[victim];
        if (p >= 0) next[static_cast<std::size_t>(p)] = q;
        if (q >= 0) prev[static_cast<std::size_t>(q)] = p;
        for (std::ptrdiff_t k : {p, q}) {
            if (k < 0) continue;
            auto u = static_cast<std::size_t>(k);
            queue.erase({current[u], -k});
            current[u] = gain(u);
            queue.insert({current[u], -k});
        }
    }
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < n; ++i)
        if (alive[i]) kept.push_back(order[i]);
    std::sort(kept.begin(), kept.end());
    return kept;
}

}  // namespace

std::vector<std::size_t> hypervolume_cap(std::span<const ValueVector> front, std::size_t limit) {
    std::vector<std::size_t> kept(front.size());
    std::iota(kept.begin(), kept.end(), std::size_t{0});
    if (front.size() <= limit) return kept;
    ValueVector ref = reference_below(front);
    if (ref.size() == 2)
        if (auto fast = hypervolume_cap2(front, limit, ref)) return *fast;
    auto subset = [&](std::size_t skip) {
        std::vector<ValueVector> pts;
        for (std::size_t i = 0; i < kept.size(); ++i)
            if (i != skip) pts.push_back(front[kept[i]]);
        return pts;
    };
    while (kept.size() > limit) {
        double total = hv_rec(subset(kept.size()), ref);
        std::size_t worst = 0;
        double worst_gain = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < kept.size(); ++i) {
            double gain = total - hv_rec(subset(i), ref);
            bool smaller = gain < worst_gain ||
                           (gain == worst_gain && lex_greater(front[kept[worst]], front[kept[i]]));
            if (smaller) {
                worst = i;
                worst_gain = gain;
            }
        }
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    return kept;
}

ValueVector reference_below(std::span<const ValueVector> vectors, double margin) {
    if (vectors.empty()) return {};
    ValueVector ref = vectors.front();
    for (const auto& v : vectors)
        for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = std::min(ref[i], v[i]);
    for (auto& x : ref) x -= margin;
    return ref;
}

}  // namespace valence
