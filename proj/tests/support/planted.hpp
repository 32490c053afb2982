#pragma once

// Planted-partition directed graphs with community-correlated node features.

#include "generators.hpp"

#include <chanscope/channel_label.hpp>
#include <chanscope/graph_embed.hpp>

namespace gen {

struct PlantedGraph {
    chanscope::ChannelGraph graph;
    chanscope::nn::Matrix features;             // row i belongs to graph.node_ids()[i]
    std::vector<chanscope::ChannelClass> labels; // community 1 is "hater"
};

struct PlantedConfig {
    std::size_t nodes = 200;
    double p_in = 0.08;
    double p_out = 0.005;
    std::size_t dims = 9;
    double signal = 0.5; // per-dimension mean offset between the communities
    double noise = 1.0;
};

inline PlantedGraph planted_partition(chanscope::Rng& rng, const PlantedConfig& cfg = {}) {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < cfg.nodes; ++i) ids.insert(channel_name(i));
    PlantedGraph pg{chanscope::ChannelGraph(ids), chanscope::nn::Matrix(static_cast<Eigen::Index>(cfg.nodes),
                                                                        static_cast<Eigen::Index>(cfg.dims)),
                    {}};
    // channel_name is zero padded, so node index i is channel_name(i)
    for (std::size_t i = 0; i < cfg.nodes; ++i) pg.labels.push_back(i % 2 ? chanscope::ChannelClass::hater : chanscope::ChannelClass::neutral);
    for (std::size_t i = 0; i < cfg.nodes; ++i)
        for (std::size_t j = 0; j < cfg.nodes; ++j) {
            if (i == j) continue;
            double p = pg.labels[i] == pg.labels[j] ? cfg.p_in : cfg.p_out;
            if (rng.bernoulli(p)) pg.graph.add_edge(channel_name(i), channel_name(j));
        }
    for (std::size_t i = 0; i < cfg.nodes; ++i) {
        double sign = pg.labels[i] == chanscope::ChannelClass::hater ? 1.0 : -1.0;
        for (std::size_t d = 0; d < cfg.dims; ++d)
            pg.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
                sign * cfg.signal / 2.0 + cfg.noise * rng.normal();
    }
    return pg;
}

} // namespace gen
