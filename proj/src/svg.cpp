#include "semmap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <vector>

#include "semmap/errors.hpp"
#include "semmap/rng.hpp"

namespace semmap {

namespace {

constexpr const char* kPalette[] = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b4", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#2f4b7c", "#a05195",
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Point {
    double x = 0.0, y = 0.0;
};

// Fruchterman-Reingold on one component; node count stays small enough for
// the quadratic repulsion pass.
std::vector<Point> layout_component(const CowordNetwork& net,
                                    const std::vector<std::size_t>& members,
                                    Rng& rng) {
    const std::size_t n = members.size();
    const double side = 60.0 * std::sqrt(static_cast<double>(n));
    std::vector<Point> pos(n);
    for (auto& p : pos) {
        p.x = rng.next_double() * side;
        p.y = rng.next_double() * side;
    }
    if (n == 1) return pos;

    std::vector<std::size_t> local(net.nodes.size(), 0);
    for (std::size_t i = 0; i < n; ++i) local[members[i]] = i;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : net.edges)  // members is ascending
        if (std::binary_search(members.begin(), members.end(), e.u))
            edges.emplace_back(local[e.u], local[e.v]);

    const double k = side / std::sqrt(static_cast<double>(n));
    const int iterations = 150;
    std::vector<Point> disp(n);
    for (int it = 0; it < iterations; ++it) {
        const double temp = side / 10.0 *
                            (1.0 - static_cast<double>(it) / iterations);
        for (auto& d : disp) d = {0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double dx = pos[i].x - pos[j].x, dy = pos[i].y - pos[j].y;
                double dist = std::sqrt(dx * dx + dy * dy);
                if (dist < 1e-9) {
                    dx = 1e-3 * (static_cast<double>(i) + 1.0);
                    dy = 1e-3;
                    dist = std::sqrt(dx * dx + dy * dy);
                }
                const double f = k * k / dist / dist;
                disp[i].x += dx * f;
                disp[i].y += dy * f;
                disp[j].x -= dx * f;
                disp[j].y -= dy * f;
            }
        for (const auto& [a, b] : edges) {
            double dx = pos[a].x - pos[b].x, dy = pos[a].y - pos[b].y;
            double dist = std::sqrt(dx * dx + dy * dy);
            if (dist < 1e-9) dist = 1e-9;
            const double f = dist / k;
            disp[a].x -= dx / dist * f;
            disp[a].y -= dy / dist * f;
            disp[b].x += dx / dist * f;
            disp[b].y += dy / dist * f;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double len =
                std::sqrt(disp[i].x * disp[i].x + disp[i].y * disp[i].y);
            if (len < 1e-12) continue;
            const double step = std::min(len, temp);
            pos[i].x += disp[i].x / len * step;
            pos[i].y += disp[i].y / len * step;
        }
    }
    return pos;
}

}  // namespace

void emit_svg_map(const CowordNetwork& net, const Partition& partition,
                  std::uint64_t seed, const std::filesystem::path& file) {
    if (net.nodes.empty()) throw DataError("cannot render an empty network");
    if (partition.assignment.size() != net.nodes.size())
        throw DataError("partition does not match network");

    // connected components, each listed ascending, ordered by smallest member
    std::vector<std::size_t> root(net.nodes.size());
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](std::size_t x) {
        while (root[x] != x) x = root[x] = root[root[x]];
        return x;
    };
    for (const auto& e : net.edges) root[find(e.u)] = find(e.v);

    std::vector<std::vector<std::size_t>> components;
    std::vector<std::size_t> comp_of(net.nodes.size(), SIZE_MAX);
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        const std::size_t r = find(i);
        if (comp_of[r] == SIZE_MAX) {
            comp_of[r] = components.size();
            components.emplace_back();
        }
        components[comp_of[r]].push_back(i);
    }

    Rng rng(seed);
    struct Placed {
        std::vector<std::size_t> members;
        std::vector<Point> pos;   // shifted to its own origin
        double w = 0.0, h = 0.0;  // bounding box incl. node radii and labels
    };
    std::vector<Placed> placed;
    for (const auto& comp : components) {
        Placed p;
        p.members = comp;
        p.pos = layout_component(net, comp, rng);
        double min_x = 1e18, min_y = 1e18, max_x = -1e18, max_y = -1e18;
        for (std::size_t i = 0; i < comp.size(); ++i) {
            const double r = 4.0 * node_size(net.nodes[comp[i]].frequency);
            min_x = std::min(min_x, p.pos[i].x - r - 30.0);
            max_x = std::max(max_x, p.pos[i].x + r + 30.0);
            min_y = std::min(min_y, p.pos[i].y - r - 10.0);
            max_y = std::max(max_y, p.pos[i].y + r + 22.0);  // label row
        }
        for (auto& pt : p.pos) {
            pt.x -= min_x;
            pt.y -= min_y;
        }
        p.w = max_x - min_x;
        p.h = max_y - min_y;
        placed.push_back(std::move(p));
    }

    // shelf packing with fixed padding keeps component boxes disjoint
    const double pad = 40.0, max_row_width = 1400.0;
    double x = pad, y = pad, row_h = 0.0, total_w = 0.0;
    std::vector<Point> origin(placed.size());
    for (std::size_t c = 0; c < placed.size(); ++c) {
        if (x > pad && x + placed[c].w > max_row_width) {
            x = pad;
            y += row_h + pad;
            row_h = 0.0;
        }
        origin[c] = {x, y};
        x += placed[c].w + pad;
        row_h = std::max(row_h, placed[c].h);
        total_w = std::max(total_w, x);
    }
    const double total_h = y + row_h + pad;

    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(total_w)
        << "\" height=\"" << num(total_h) << "\" viewBox=\"0 0 " << num(total_w)
        << ' ' << num(total_h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    std::vector<Point> abs_pos(net.nodes.size());
    for (std::size_t c = 0; c < placed.size(); ++c)
        for (std::size_t i = 0; i < placed[c].members.size(); ++i)
            abs_pos[placed[c].members[i]] = {origin[c].x + placed[c].pos[i].x,
                                             origin[c].y + placed[c].pos[i].y};

    for (const auto& e : net.edges)
        out << "<line x1=\"" << num(abs_pos[e.u].x) << "\" y1=\""
            << num(abs_pos[e.u].y) << "\" x2=\"" << num(abs_pos[e.v].x)
            << "\" y2=\"" << num(abs_pos[e.v].y) << "\" stroke=\"#c8c8c8\" stroke-width=\""
            << num(0.5 + 1.5 * std::min(e.weight, 1.0)) << "\"/>\n";

    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        const double r = 4.0 * node_size(net.nodes[i].frequency);
        const char* fill =
            kPalette[static_cast<std::size_t>(partition.assignment[i]) % kPaletteSize];
        out << "<circle cx=\"" << num(abs_pos[i].x) << "\" cy=\"" << num(abs_pos[i].y)
            << "\" r=\"" << num(r) << "\" fill=\"" << fill
            << "\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n";
        out << "<text x=\"" << num(abs_pos[i].x) << "\" y=\""
            << num(abs_pos[i].y + r + 12.0)
            << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
            << net.nodes[i].word << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace semmap
