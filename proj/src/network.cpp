#include "semmap/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "semmap/errors.hpp"

namespace semmap {

namespace {

std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Working graph for the aggregation phases. Self-loop weight is stored
// already doubled (A_ii convention), so strength = self_weight + sum of
// neighbor weights and 2m = sum of strengths.
struct WorkGraph {
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<double> self_weight;
    std::vector<double> strength;
    double two_m = 0.0;

    int size() const { return static_cast<int>(adj.size()); }

    void finish() {
        strength.assign(adj.size(), 0.0);
        for (std::size_t u = 0; u < adj.size(); ++u) {
            strength[u] = self_weight[u];
            for (const auto& [v, w] : adj[u]) strength[u] += w;
        }
        two_m = 0.0;
        for (double s : strength) two_m += s;
    }
};

WorkGraph to_work_graph(const CowordNetwork& net) {
    WorkGraph g;
    g.adj.resize(net.nodes.size());
    g.self_weight.assign(net.nodes.size(), 0.0);
    for (const auto& e : net.edges) {
        g.adj[e.u].emplace_back(static_cast<int>(e.v), e.weight);
        g.adj[e.v].emplace_back(static_cast<int>(e.u), e.weight);
    }
    g.finish();
    return g;
}

// One pass of local moves; returns true if any node changed community.
// assignment is updated in place, in/tot track community totals.
bool local_move_phase(const WorkGraph& g, std::vector<int>& community) {
    const int n = g.size();
    std::vector<double> tot(n, 0.0), in(n, 0.0);
    for (int u = 0; u < n; ++u) {
        tot[community[u]] += g.strength[u];
        in[community[u]] += g.self_weight[u];
    }
    for (int u = 0; u < n; ++u)
        for (const auto& [v, w] : g.adj[u])
            if (community[u] == community[v]) in[community[u]] += w;

    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (int u = 0; u < n; ++u) {
            const int old_c = community[u];

            // links from u into each adjacent community, ascending id
            std::map<int, double> links;
            links[old_c] += 0.0;
            for (const auto& [v, w] : g.adj[u]) links[community[v]] += w;

            tot[old_c] -= g.strength[u];
            in[old_c] -= 2.0 * links[old_c] + g.self_weight[u];

            // gain of joining c (common factor 2/2m dropped); ties keep
            // the current community
            auto gain = [&](int c) {
                return links.count(c) ? links[c] - tot[c] * g.strength[u] / g.two_m
                                      : -tot[c] * g.strength[u] / g.two_m;
            };
            int best_c = old_c;
            double best_gain = gain(old_c);
            for (const auto& [c, w] : links) {
                (void)w;
                if (c == old_c) continue;
                const double gc = gain(c);
                if (gc > best_gain + 1e-12) {
                    best_gain = gc;
                    best_c = c;
                }
            }

            tot[best_c] += g.strength[u];
            in[best_c] += 2.0 * links[best_c] + g.self_weight[u];
            community[u] = best_c;
            if (best_c != old_c) {
                moved = true;
                any_move = true;
            }
        }
    }
    return any_move;
}

// Collapses communities into nodes; labels are renumbered ascending.
WorkGraph aggregate(const WorkGraph& g, std::vector<int>& community) {
    std::vector<int> relabel(g.size(), -1);
    int next = 0;
    std::vector<int> order(community.begin(), community.end());
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    for (int c : order) relabel[c] = next++;
    for (auto& c : community) c = relabel[c];

    WorkGraph out;
    out.adj.resize(next);
    out.self_weight.assign(next, 0.0);
    std::vector<std::map<int, double>> merged(next);
    for (int u = 0; u < g.size(); ++u) {
        out.self_weight[community[u]] += g.self_weight[u];
        for (const auto& [v, w] : g.adj[u]) {
            if (community[u] == community[v]) {
                out.self_weight[community[u]] += w;  // both directions land here
            } else {
                merged[community[u]][community[v]] += w;
            }
        }
    }
    for (int c = 0; c < next; ++c)
        for (const auto& [d, w] : merged[c]) out.adj[c].emplace_back(d, w);
    out.finish();
    return out;
}

}  // namespace

double CowordNetwork::total_edge_weight() const {
    double m = 0.0;
    for (const auto& e : edges) m += e.weight;
    return m;
}

int Partition::num_communities() const {
    int max_c = -1;
    for (int c : assignment) max_c = std::max(max_c, c);
    return max_c + 1;
}

CowordNetwork build_network(const SimilarityMatrix& sim,
                            const std::vector<std::int64_t>& frequencies,
                            double tau) {
    if (tau < 0.0 || tau >= 1.0) throw DataError("tau must lie in [0,1)");
    if (frequencies.size() != sim.size())
        throw DataError("frequency list does not match similarity matrix");

    CowordNetwork net;
    net.tau = tau;
    net.nodes.reserve(sim.size());
    for (std::size_t i = 0; i < sim.size(); ++i)
        net.nodes.push_back({sim.words[i], frequencies[i]});
    for (std::size_t i = 0; i < sim.size(); ++i)
        for (std::size_t j = i + 1; j < sim.size(); ++j)
            if (sim.at(i, j) > tau) net.edges.push_back({i, j, sim.at(i, j)});
    return net;
}

double modularity(const CowordNetwork& net, const std::vector<int>& assignment) {
    if (assignment.size() != net.nodes.size())
        throw DataError("partition does not cover all nodes");
    const double m = net.total_edge_weight();
    if (m <= 0.0) throw DataError("modularity undefined on zero total edge weight");

    int num_c = 0;
    for (int c : assignment) {
        if (c < 0) throw DataError("negative community id");
        num_c = std::max(num_c, c + 1);
    }

    std::vector<double> in(num_c, 0.0), tot(num_c, 0.0);
    for (const auto& e : net.edges) {
        if (assignment[e.u] == assignment[e.v]) in[assignment[e.u]] += 2.0 * e.weight;
        tot[assignment[e.u]] += e.weight;
        tot[assignment[e.v]] += e.weight;
    }

    const double two_m = 2.0 * m;
    double q = 0.0;
    for (int c = 0; c < num_c; ++c)
        q += in[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
    return q;
}

Partition louvain_partition(const CowordNetwork& net) {
    Partition result;
    result.assignment.assign(net.nodes.size(), 0);

    if (net.edges.empty()) {
        warn("network has no edges; every node becomes its own community and Q is reported as 0");
        for (std::size_t i = 0; i < net.nodes.size(); ++i)
            result.assignment[i] = static_cast<int>(i);
        result.modularity_q = 0.0;
        return result;
    }

    WorkGraph g = to_work_graph(net);
    std::vector<int> node_to_current(net.nodes.size());
    for (std::size_t i = 0; i < net.nodes.size(); ++i)
        node_to_current[i] = static_cast<int>(i);

    for (;;) {
        std::vector<int> community(g.size());
        for (int i = 0; i < g.size(); ++i) community[i] = i;
        const bool improved = local_move_phase(g, community);
        if (!improved) break;
        g = aggregate(g, community);
        for (auto& c : node_to_current) c = community[c];
        if (g.size() <= 1) break;
    }

    // contiguous ids in order of first appearance over ascending node id
    std::unordered_map<int, int> relabel;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        auto [it, inserted] =
            relabel.try_emplace(node_to_current[i], static_cast<int>(relabel.size()));
        result.assignment[i] = it->second;
        (void)inserted;
    }
    result.modularity_q = modularity(net, result.assignment);
    return result;
}

std::size_t isolate_count(const CowordNetwork& net) {
    std::vector<bool> connected(net.nodes.size(), false);
    for (const auto& e : net.edges) {
        connected[e.u] = true;
        connected[e.v] = true;
    }
    return std::count(connected.begin(), connected.end(), false);
}

double node_size(std::int64_t frequency) {
    return 1.0 + std::log(static_cast<double>(std::max<std::int64_t>(frequency, 1)));
}

void export_pajek(const CowordNetwork& net, const Partition& partition,
                  const std::filesystem::path& base) {
    if (partition.assignment.size() != net.nodes.size())
        throw DataError("partition does not match network");

    {
        std::ofstream out(base.string() + ".net");
        if (!out) throw DataError("cannot write " + base.string() + ".net");
        out << "*Vertices " << net.nodes.size() << "\n";
        for (std::size_t i = 0; i < net.nodes.size(); ++i)
            out << i + 1 << " \"" << net.nodes[i].word << "\"\n";
        out << "*Edges\n";
        for (const auto& e : net.edges)
            out << e.u + 1 << ' ' << e.v + 1 << ' ' << format_sig6(e.weight) << "\n";
    }
    {
        std::ofstream out(base.string() + ".clu");
        if (!out) throw DataError("cannot write " + base.string() + ".clu");
        out << "*Vertices " << net.nodes.size() << "\n";
        for (int c : partition.assignment) out << c + 1 << "\n";
    }
    {
        std::ofstream out(base.string() + ".vec");
        if (!out) throw DataError("cannot write " + base.string() + ".vec");
        out << "*Vertices " << net.nodes.size() << "\n";
        for (const auto& n : net.nodes) out << format_sig6(node_size(n.frequency)) << "\n";
    }
}

void export_graphml(const CowordNetwork& net, const Partition& partition,
                    const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());

    auto escape = [](const std::string& s) {
        std::string r;
        for (char c : s) {
            switch (c) {
                case '&': r += "&amp;"; break;
                case '<': r += "&lt;"; break;
                case '>': r += "&gt;"; break;
                case '"': r += "&quot;"; break;
                default: r += c;
            }
        }
        return r;
    };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"word\" for=\"node\" attr.name=\"word\" attr.type=\"string\"/>\n"
        << "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n"
        << "  <key id=\"frequency\" for=\"node\" attr.name=\"frequency\" attr.type=\"long\"/>\n"
        << "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n"
        << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        << "  <graph edgedefault=\"undirected\">\n";
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        out << "    <node id=\"n" << i << "\">"
            << "<data key=\"word\">" << escape(net.nodes[i].word) << "</data>"
            << "<data key=\"community\">" << partition.assignment[i] << "</data>"
            << "<data key=\"frequency\">" << net.nodes[i].frequency << "</data>"
            << "<data key=\"size\">" << format_sig6(node_size(net.nodes[i].frequency))
            << "</data></node>\n";
    }
    for (std::size_t k = 0; k < net.edges.size(); ++k) {
        const auto& e = net.edges[k];
        out << "    <edge id=\"e" << k << "\" source=\"n" << e.u << "\" target=\"n"
            << e.v << "\"><data key=\"weight\">" << format_sig6(e.weight)
            << "</data></edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

namespace {

std::vector<std::string> parse_net_labels(std::ifstream& in, std::size_t n) {
    std::vector<std::string> labels(n);
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw DataError("truncated .net vertex section");
        const auto first_quote = line.find('"');
        const auto last_quote = line.rfind('"');
        if (first_quote == std::string::npos || last_quote <= first_quote)
            throw DataError("malformed .net vertex line: " + line);
        std::size_t index = 0;
        try {
            index = std::stoul(line.substr(0, first_quote));
        } catch (const std::exception&) {
            throw DataError("malformed .net vertex index: " + line);
        }
        if (index < 1 || index > n) throw DataError("vertex index out of range: " + line);
        labels[index - 1] = line.substr(first_quote + 1, last_quote - first_quote - 1);
    }
    return labels;
}

}  // namespace

std::vector<std::string> read_pajek_labels(const std::filesystem::path& net_file) {
    std::ifstream in(net_file);
    if (!in) throw DataError("cannot read " + net_file.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("*Vertices", 0) != 0)
        throw DataError(net_file.string() + " does not start with *Vertices");
    const std::size_t n = std::stoul(line.substr(10));
    return parse_net_labels(in, n);
}

CowordNetwork read_pajek_network(const std::filesystem::path& net_file) {
    std::ifstream in(net_file);
    if (!in) throw DataError("cannot read " + net_file.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("*Vertices", 0) != 0)
        throw DataError(net_file.string() + " does not start with *Vertices");
    const std::size_t n = std::stoul(line.substr(10));

    CowordNetwork net;
    for (const auto& label : parse_net_labels(in, n)) net.nodes.push_back({label, 0});

    if (!std::getline(in, line) || line.rfind("*Edges", 0) != 0)
        throw DataError(net_file.string() + " is missing an *Edges section");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::size_t u = 0, v = 0;
        double w = 0.0;
        if (!(ss >> u >> v >> w)) throw DataError("malformed .net edge line: " + line);
        if (u < 1 || u > n || v < 1 || v > n)
            throw DataError("edge endpoint out of range: " + line);
        net.edges.push_back({std::min(u, v) - 1, std::max(u, v) - 1, w});
    }
    return net;
}

}  // namespace semmap
