#pragma once

// Agglomerative average-linkage clustering on a precomputed distance matrix.

#include <chanscope/core.hpp>
#include <chanscope/io.hpp>

#include <algorithm>
#include <limits>
#include <vector>

namespace chanscope {

/// Cluster ids: leaves are 0..n-1, the i-th merge creates cluster n + i.
struct Merge {
    std::size_t cluster_a = 0; // smaller id
    std::size_t cluster_b = 0;
    double distance = 0.0;
    std::size_t size = 0;
};

struct ClusterTree {
    std::vector<Merge> merges;
    std::vector<std::size_t> leaf_order;
};

/// Average linkage (UPGMA) via the Lance-Williams update. Among equal distances the pair with
/// the lexicographically smallest (min id, max id) is merged first.
inline ClusterTree hierarchical_cluster(const std::vector<std::vector<double>>& dist) {
    const std::size_t n = dist.size();
    if (n < 2) throw Error("hierarchical_cluster: need at least two points");
    for (const auto& row : dist)
        if (row.size() != n) throw Error("hierarchical_cluster: matrix is not square");

    // slots hold the active clusters; a merge reuses the slot of its first member
    std::vector<std::vector<double>> d = dist;
    std::vector<std::size_t> slot_id(n), slot_size(n, 1);
    std::vector<bool> active(n, true);
    for (std::size_t i = 0; i < n; ++i) slot_id[i] = i;
    const std::size_t total = 2 * n - 1;
    std::vector<std::size_t> left(total), right(total);

    ClusterTree tree;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t sa = n, sb = n, best_lo = 0, best_hi = 0;
        for (std::size_t a = 0; a < n; ++a) {
            if (!active[a]) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!active[b]) continue;
                std::size_t lo = std::min(slot_id[a], slot_id[b]), hi = std::max(slot_id[a], slot_id[b]);
                if (sa == n || d[a][b] < best || (d[a][b] == best && (lo < best_lo || (lo == best_lo && hi < best_hi)))) {
                    best = d[a][b];
                    sa = a;
                    sb = b;
                    best_lo = lo;
                    best_hi = hi;
                }
            }
        }
        const std::size_t c = n + step;
        const std::size_t merged = slot_size[sa] + slot_size[sb];
        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == sa || x == sb) continue;
            double v = (static_cast<double>(slot_size[sa]) * d[sa][x] + static_cast<double>(slot_size[sb]) * d[sb][x]) /
                       static_cast<double>(merged);
            d[sa][x] = d[x][sa] = v;
        }
        left[c] = best_lo;
        right[c] = best_hi;
        active[sb] = false;
        slot_id[sa] = c;
        slot_size[sa] = merged;
        tree.merges.push_back({best_lo, best_hi, best, merged});
    }

    // depth-first leaf order from the root, left subtree first
    std::vector<std::size_t> stack{total - 1};
    while (!stack.empty()) {
        auto node = stack.back();
        stack.pop_back();
        if (node < n) {
            tree.leaf_order.push_back(node);
        } else {
            stack.push_back(right[node]);
            stack.push_back(left[node]);
        }
    }
    return tree;
}

inline io::ordered_json to_json(const ClusterTree& t, const std::vector<std::string>& leaf_names = {}) {
    io::ordered_json j;
    j["merges"] = io::ordered_json::array();
    for (const auto& m : t.merges)
        j["merges"].push_back({{"a", m.cluster_a}, {"b", m.cluster_b}, {"distance", m.distance}, {"size", m.size}});
    j["leaf_order"] = t.leaf_order;
    if (!leaf_names.empty()) j["leaves"] = leaf_names;
    return j;
}

} // namespace chanscope
