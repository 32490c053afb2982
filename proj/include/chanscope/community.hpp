#pragma once

// 2-D reduction of node embeddings, density-based clustering and per-community hater shares.

#include <chanscope/channel_label.hpp>
#include <chanscope/nn.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace chanscope {

using Point2 = std::array<double, 2>;

/// Pluggable 2-D reducer; the default is a principal-component projection.
class Reducer2D {
public:
    virtual ~Reducer2D() = default;
    virtual std::vector<Point2> reduce(const nn::Matrix& embeddings) const = 0;
};

struct Projection {
    std::vector<Point2> points;
    bool degenerate = false; // rank-0 input: all points at the origin
};

/// Centres the rows and projects them on the top two principal axes. Each axis is oriented so
/// that its largest-magnitude loading is positive, which makes the output deterministic.
inline Projection pca_2d(const nn::Matrix& x) {
    if (x.rows() < 3) throw Error("reduce_2d: need at least three points");
    nn::RowVector mean = x.colwise().mean();
    nn::Matrix centered = x.rowwise() - mean;
    Projection out;
    out.points.assign(static_cast<std::size_t>(x.rows()), Point2{0.0, 0.0});
    if (centered.cwiseAbs().maxCoeff() == 0.0) {
        out.degenerate = true;
        return out;
    }
    nn::Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows());
    Eigen::SelfAdjointEigenSolver<nn::Matrix> eig(cov);
    const auto d = cov.rows();
    nn::Matrix axes(d, 2);
    axes.setZero();
    for (int k = 0; k < 2 && k < d; ++k) {
        nn::Vector v = eig.eigenvectors().col(d - 1 - k);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        // axes with no variance contribute nothing
        if (eig.eigenvalues()(d - 1 - k) > 0.0) axes.col(k) = v;
    }
    nn::Matrix proj = centered * axes;
    for (Eigen::Index i = 0; i < proj.rows(); ++i) out.points[static_cast<std::size_t>(i)] = {proj(i, 0), proj(i, 1)};
    return out;
}

class PcaReducer : public Reducer2D {
public:
    std::vector<Point2> reduce(const nn::Matrix& embeddings) const override { return pca_2d(embeddings).points; }
};

inline std::vector<Point2> reduce_2d(const nn::Matrix& embeddings, const Reducer2D& reducer = PcaReducer{}) {
    auto pts = reducer.reduce(embeddings);
    if (pts.size() != static_cast<std::size_t>(embeddings.rows())) throw Error("reduce_2d: reducer changed cardinality");
    for (const auto& p : pts)
        if (!std::isfinite(p[0]) || !std::isfinite(p[1])) throw Error("reduce_2d: non-finite coordinate");
    return pts;
}

// ---------------------------------------------------------------------------
// DBSCAN

inline constexpr int kNoise = -1;

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

/// Classic single-pass DBSCAN. A point is core when at least `min_pts` points (itself included)
/// lie within `eps`. Clusters are numbered in scan order of their first core point; border points
/// join the first cluster that reaches them.
inline std::vector<int> dbscan(const std::vector<Point2>& pts, double eps, std::size_t min_pts) {
    if (!(eps > 0.0)) throw Error("dbscan: eps must be positive");
    if (min_pts < 1) throw Error("dbscan: min_pts must be >= 1");
    const std::size_t n = pts.size();
    // sort by x so that neighbourhood queries scan a window
    std::vector<std::size_t> by_x(n);
    for (std::size_t i = 0; i < n; ++i) by_x[i] = i;
    std::sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) {
        return pts[a][0] < pts[b][0] || (pts[a][0] == pts[b][0] && a < b);
    });
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[by_x[r]] = r;
    auto neighbors = [&](std::size_t p) {
        std::vector<std::size_t> out;
        for (std::size_t r = rank[p]; r-- > 0;) {
            if (pts[p][0] - pts[by_x[r]][0] > eps) break;
            if (distance(pts[p], pts[by_x[r]]) <= eps) out.push_back(by_x[r]);
        }
        for (std::size_t r = rank[p]; r < n; ++r) {
            if (pts[by_x[r]][0] - pts[p][0] > eps) break;
            if (distance(pts[p], pts[by_x[r]]) <= eps) out.push_back(by_x[r]);
        }
        std::sort(out.begin(), out.end());
        return out;
    };

    constexpr int unvisited = -2;
    std::vector<int> label(n, unvisited);
    int next_cluster = 0;
    for (std::size_t p = 0; p < n; ++p) {
        if (label[p] != unvisited) continue;
        auto nb = neighbors(p);
        if (nb.size() < min_pts) {
            label[p] = kNoise;
            continue;
        }
        const int c = next_cluster++;
        label[p] = c;
        std::deque<std::size_t> queue(nb.begin(), nb.end());
        while (!queue.empty()) {
            auto q = queue.front();
            queue.pop_front();
            if (label[q] == kNoise) label[q] = c; // border point
            if (label[q] != unvisited) continue;
            label[q] = c;
            auto nq = neighbors(q);
            if (nq.size() >= min_pts) queue.insert(queue.end(), nq.begin(), nq.end());
        }
    }
    return label;
}

/// Median distance to the k-th nearest neighbour (self excluded).
inline double median_knn_distance(const std::vector<Point2>& pts, std::size_t k = 4) {
    if (pts.size() <= k) throw Error("median_knn_distance: need more than k points");
    std::vector<double> kth;
    kth.reserve(pts.size());
    std::vector<double> d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        d.clear();
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i) d.push_back(distance(pts[i], pts[j]));
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
        kth.push_back(d[k - 1]);
    }
    std::sort(kth.begin(), kth.end());
    auto m = kth.size() / 2;
    return kth.size() % 2 ? kth[m] : 0.5 * (kth[m - 1] + kth[m]);
}

// ---------------------------------------------------------------------------
// Community statistics

struct CommunityStats {
    int community_id = 0; // kNoise for the outlier class
    std::size_t size = 0;
    std::size_t hater_count = 0;
    std::size_t seed_count = 0;
    double hater_proportion = 0.0;
};

struct CommunityReport {
    std::vector<CommunityStats> communities; // ids 0..k-1 in order
    std::optional<CommunityStats> outliers;
};

inline CommunityReport community_stats(const std::vector<std::string>& channel_ids, const std::vector<int>& assignment,
                                       const std::map<std::string, ChannelClass>& labels,
                                       const std::set<std::string>& seeds = {}) {
    if (channel_ids.size() != assignment.size()) throw Error("community_stats: assignment size mismatch");
    std::map<int, CommunityStats> by_id;
    for (std::size_t i = 0; i < channel_ids.size(); ++i) {
        auto it = labels.find(channel_ids[i]);
        if (it == labels.end()) throw Error("community_stats: channel '" + channel_ids[i] + "' has no label");
        if (assignment[i] < kNoise) throw Error("community_stats: invalid community id");
        auto& s = by_id[assignment[i]];
        s.community_id = assignment[i];
        ++s.size;
        s.hater_count += it->second == ChannelClass::hater;
        s.seed_count += seeds.count(channel_ids[i]);
    }
    CommunityReport r;
    int expected = 0;
    for (auto& [id, s] : by_id) {
        s.hater_proportion = static_cast<double>(s.hater_count) / static_cast<double>(s.size);
        if (id == kNoise) {
            r.outliers = s;
        } else {
            if (id != expected++) throw Error("community_stats: community ids must be contiguous from 0");
            r.communities.push_back(s);
        }
    }
    return r;
}

} // namespace chanscope
