#pragma once

// Directed channel graph built from mentions and forwards.

#include <chanscope/archive.hpp>
#include <chanscope/core.hpp>
#include <chanscope/io.hpp>

#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace chanscope {

/// Node ids are kept sorted; edges are keyed by (src, dst) node index with occurrence weights.
class ChannelGraph {
public:
    ChannelGraph() = default;

    explicit ChannelGraph(std::set<std::string> nodes) { set_nodes(std::move(nodes)); }

    void set_nodes(std::set<std::string> nodes) {
        ids_.assign(nodes.begin(), nodes.end());
        index_.clear();
        for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
        edges_.clear();
    }

    std::size_t node_count() const { return ids_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<std::string>& node_ids() const { return ids_; }
    const std::map<std::pair<std::size_t, std::size_t>, std::int64_t>& edges() const { return edges_; }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    std::size_t index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw Error("unknown node '" + id + "'");
        return it->second;
    }

    /// Adds `weight` occurrences of src -> dst. Self-loops are ignored.
    void add_edge(const std::string& src, const std::string& dst, std::int64_t weight = 1) {
        if (weight < 1) throw Error("edge weight must be >= 1");
        auto s = index_of(src), d = index_of(dst);
        if (s == d) return;
        edges_[{s, d}] += weight;
    }

    std::optional<std::int64_t> weight(const std::string& src, const std::string& dst) const {
        auto it = edges_.find({index_of(src), index_of(dst)});
        if (it == edges_.end()) return std::nullopt;
        return it->second;
    }

    /// Per-node sorted neighbour lists.
    std::vector<std::vector<std::size_t>> out_neighbors() const {
        std::vector<std::vector<std::size_t>> adj(ids_.size());
        for (const auto& [e, _] : edges_) adj[e.first].push_back(e.second);
        return adj;
    }

    std::vector<std::vector<std::size_t>> in_neighbors() const {
        std::vector<std::vector<std::size_t>> adj(ids_.size());
        for (const auto& [e, _] : edges_) adj[e.second].push_back(e.first);
        return adj;
    }

    /// Optional per-node feature vectors.
    std::map<std::string, std::vector<double>> node_features;

    friend bool operator==(const ChannelGraph& a, const ChannelGraph& b) {
        return a.ids_ == b.ids_ && a.edges_ == b.edges_ && a.node_features == b.node_features;
    }

private:
    std::vector<std::string> ids_;
    std::map<std::string, std::size_t> index_;
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> edges_;
};

using NodeFilter = std::function<bool(const Channel&, const std::vector<RawMessage>&)>;

inline NodeFilter accept_all_channels() {
    return [](const Channel&, const std::vector<RawMessage>&) { return true; };
}

/// German channels with at least one message in [start, end).
inline NodeFilter german_and_active(Timestamp start, Timestamp end) {
    return [start, end](const Channel& c, const std::vector<RawMessage>& msgs) {
        if (!c.is_german) return false;
        for (const auto& m : msgs)
            if (m.timestamp >= start && m.timestamp < end) return true;
        return false;
    };
}

/// Edge A -> B for every message of A that mentions B or is forwarded from B; both ends must pass
/// the filter. Occurrences accumulate into the weight.
inline ChannelGraph build_graph(const Archive& archive, const NodeFilter& node_filter = accept_all_channels()) {
    std::set<std::string> nodes;
    for (const auto& [id, ch] : archive.channels)
        if (node_filter(ch, archive.messages_of(id))) nodes.insert(id);
    ChannelGraph g(nodes);
    for (const auto& src : nodes) {
        for (const auto& m : archive.messages_of(src)) {
            for (const auto& target : m.mentions)
                if (target != src && nodes.count(target)) g.add_edge(src, target);
            if (m.forwarded_from && *m.forwarded_from != src && nodes.count(*m.forwarded_from))
                g.add_edge(src, *m.forwarded_from);
        }
    }
    return g;
}

struct GraphStats {
    std::size_t n_nodes = 0;
    std::size_t n_edges = 0;
    double density = 0.0;
    double avg_in_degree = 0.0;
    double avg_out_degree = 0.0;
};

inline GraphStats graph_stats_from_counts(std::size_t n_nodes, std::size_t n_edges) {
    if (n_nodes < 2) throw Error("graph_stats: density needs at least two nodes");
    GraphStats s;
    s.n_nodes = n_nodes;
    s.n_edges = n_edges;
    double n = static_cast<double>(n_nodes), m = static_cast<double>(n_edges);
    s.density = m / (n * (n - 1.0));
    s.avg_in_degree = s.avg_out_degree = m / n;
    return s;
}

inline GraphStats graph_stats(const ChannelGraph& g) { return graph_stats_from_counts(g.node_count(), g.edge_count()); }

inline io::ordered_json to_json(const GraphStats& s) {
    io::ordered_json j;
    j["n_nodes"] = s.n_nodes;
    j["n_edges"] = s.n_edges;
    j["density"] = s.density;
    j["avg_in_degree"] = s.avg_in_degree;
    j["avg_out_degree"] = s.avg_out_degree;
    return j;
}

/// Non-seed nodes adjacent to any seed, in either direction.
inline std::set<std::string> first_degree_network(const ChannelGraph& g, const std::set<std::string>& seeds) {
    std::set<std::size_t> seed_idx;
    for (const auto& s : seeds) seed_idx.insert(g.index_of(s));
    std::set<std::string> out;
    for (const auto& [e, _] : g.edges()) {
        if (seed_idx.count(e.first) && !seed_idx.count(e.second)) out.insert(g.node_ids()[e.second]);
        if (seed_idx.count(e.second) && !seed_idx.count(e.first)) out.insert(g.node_ids()[e.first]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Export / import

enum class GraphFormat { edge_list_csv, graphml };

inline GraphFormat parse_graph_format(std::string_view s) {
    if (s == "csv" || s == "edge-list" || s == "edgelist") return GraphFormat::edge_list_csv;
    if (s == "graphml") return GraphFormat::graphml;
    throw Error("unknown graph format '" + std::string(s) + "'");
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string xml_unescape(std::string_view s) {
    static const std::pair<std::string_view, char> entities[] = {
        {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        if (s[i] == '&') {
            bool matched = false;
            for (const auto& [ent, c] : entities)
                if (s.substr(i, ent.size()) == ent) {
                    out += c;
                    i += ent.size();
                    matched = true;
                    break;
                }
            if (!matched) throw Error("unsupported XML entity");
        } else {
            out += s[i++];
        }
    }
    return out;
}

inline std::optional<std::string> xml_attribute(std::string_view tag, std::string_view name) {
    std::string needle = " " + std::string(name) + "=\"";
    auto pos = tag.find(needle);
    if (pos == std::string_view::npos) return std::nullopt;
    pos += needle.size();
    auto end = tag.find('"', pos);
    if (end == std::string_view::npos) throw Error("unterminated XML attribute");
    return xml_unescape(tag.substr(pos, end - pos));
}

} // namespace detail

/// Canonical ordering: nodes lexicographic, edges by (src, dst).
inline void export_graph(std::ostream& out, const ChannelGraph& g, GraphFormat format) {
    const auto& ids = g.node_ids();
    if (format == GraphFormat::edge_list_csv) {
        out << "src,dst,weight\n";
        for (const auto& [e, w] : g.edges()) io::write_csv_row(out, {ids[e.first], ids[e.second], std::to_string(w)});
        return;
    }
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n"
        << "  <graph id=\"channels\" edgedefault=\"directed\">\n";
    for (const auto& id : ids) out << "    <node id=\"" << detail::xml_escape(id) << "\"/>\n";
    for (const auto& [e, w] : g.edges())
        out << "    <edge source=\"" << detail::xml_escape(ids[e.first]) << "\" target=\""
            << detail::xml_escape(ids[e.second]) << "\"><data key=\"weight\">" << w << "</data></edge>\n";
    out << "  </graph>\n</graphml>\n";
}

/// Reads an edge list; nodes are the given node set plus all edge endpoints.
inline ChannelGraph import_edge_list(std::istream& in, const std::set<std::string>& extra_nodes = {}) {
    std::vector<std::tuple<std::string, std::string, std::int64_t>> rows;
    std::set<std::string> nodes = extra_nodes;
    std::set<std::pair<std::string, std::string>> seen;
    io::for_each_csv_row(in, {"src", "dst", "weight"}, [&](std::size_t, const auto& f) {
        auto w = io::parse_int(f[2]);
        if (w < 1) throw Error("edge weight must be >= 1");
        if (f[0] == f[1]) throw Error("self-loop not allowed");
        if (!seen.insert({f[0], f[1]}).second) throw Error("duplicate edge " + f[0] + " -> " + f[1]);
        nodes.insert(f[0]);
        nodes.insert(f[1]);
        rows.emplace_back(f[0], f[1], w);
    });
    ChannelGraph g(nodes);
    for (const auto& [s, d, w] : rows) g.add_edge(s, d, w);
    return g;
}

/// Reads the GraphML subset written by `export_graph` (one element per line is not required).
inline ChannelGraph import_graphml(std::istream& in) {
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string doc = buf.str();
    std::set<std::string> nodes;
    std::vector<std::tuple<std::string, std::string, std::int64_t>> edges;
    std::size_t pos = 0;
    while ((pos = doc.find('<', pos)) != std::string::npos) {
        auto end = doc.find('>', pos);
        if (end == std::string::npos) throw Error("graphml: unterminated tag");
        std::string_view tag(doc.data() + pos, end - pos + 1);
        if (tag.starts_with("<node ")) {
            auto id = detail::xml_attribute(tag, "id");
            if (!id) throw Error("graphml: node without id");
            nodes.insert(*id);
        } else if (tag.starts_with("<edge ")) {
            auto s = detail::xml_attribute(tag, "source");
            auto t = detail::xml_attribute(tag, "target");
            if (!s || !t) throw Error("graphml: edge without endpoints");
            std::int64_t w = 1;
            auto close = doc.find("</edge>", end);
            auto self_closing = tag.size() >= 2 && tag[tag.size() - 2] == '/';
            if (!self_closing) {
                if (close == std::string::npos) throw Error("graphml: unterminated edge");
                std::string_view body(doc.data() + end + 1, close - end - 1);
                auto d = body.find("<data key=\"weight\">");
                if (d != std::string_view::npos) {
                    auto vstart = d + std::string_view("<data key=\"weight\">").size();
                    auto vend = body.find('<', vstart);
                    w = io::parse_int(body.substr(vstart, vend - vstart));
                }
                end = close + 6;
            }
            edges.emplace_back(*s, *t, w);
        }
        pos = end + 1;
    }
    ChannelGraph g(nodes);
    for (const auto& [s, t, w] : edges) {
        if (!g.contains(s) || !g.contains(t)) throw Error("graphml: edge references unknown node");
        g.add_edge(s, t, w);
    }
    return g;
}

} // namespace chanscope
