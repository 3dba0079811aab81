#include "support.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pear::testing {

namespace {

std::string rid(int k) { return "r" + std::string(k < 10 ? "0" : "") + std::to_string(k); }

std::uint64_t draw(std::mt19937_64 &g, std::uint64_t lo, std::uint64_t hi)
{
    return lo + g() % (hi - lo + 1);
}

// Path between u and v in a tree given as parent pointers toward the root.
std::vector<int> tree_path(const std::vector<int> &parent, int u, int v)
{
    std::vector<int> up_u{u}, up_v{v};
    while (parent[up_u.back()] >= 0)
        up_u.push_back(parent[up_u.back()]);
    while (parent[up_v.back()] >= 0)
        up_v.push_back(parent[up_v.back()]);
    // strip the shared tail
    while (up_u.size() > 1 && up_v.size() > 1 && up_u[up_u.size() - 2] == up_v[up_v.size() - 2]) {
        up_u.pop_back();
        up_v.pop_back();
    }
    up_v.pop_back();
    std::reverse(up_v.begin(), up_v.end());
    up_u.insert(up_u.end(), up_v.begin(), up_v.end());
    return up_u;
}

}  // namespace

Scenario random_scenario(std::uint64_t seed, const RandomWorldOptions &opts)
{
    std::mt19937_64 g(seed * 0x9e3779b97f4a7c15ULL + 17);
    Scenario s;
    s.mode = opts.mode;
    s.seed = seed;
    s.limits.until = 400;
    const std::uint32_t L = opts.interval_length;
    s.topology.interval_length = L;

    int n = 0;
    std::vector<int> parent;
    std::vector<std::pair<int, int>> extra;
    for (;;) {
        n = static_cast<int>(draw(g, opts.min_routers, opts.max_routers));
        parent.assign(n, -1);
        std::set<std::pair<int, int>> edges;
        for (int k = 1; k < n; ++k) {
            parent[k] = static_cast<int>(draw(g, 0, k - 1));
            edges.insert({parent[k], k});
        }
        extra.clear();
        const int want = static_cast<int>(draw(g, 1, n));
        for (int tries = 0; tries < 8 * n && static_cast<int>(extra.size()) < want; ++tries) {
            int a = static_cast<int>(draw(g, 0, n - 1)), b = static_cast<int>(draw(g, 0, n - 1));
            if (a == b)
                continue;
            if (a > b)
                std::swap(a, b);
            if (edges.insert({a, b}).second)
                extra.push_back({a, b});
        }
        s.topology = Topology{};
        s.topology.interval_length = L;
        for (int k = 0; k < n; ++k)
            s.topology.routers[rid(k)] =
                RouterSpec{Address(static_cast<std::uint32_t>(k) * L), SecretOffset(static_cast<std::uint32_t>(draw(g, 1, L - 1))), true};
        for (auto [a, b] : edges)
            s.topology.add_link(rid(a), rid(b));
        if (diameter(s.topology) >= static_cast<std::uint32_t>(opts.min_diameter) && !extra.empty())
            break;
    }

    const int prefixes = static_cast<int>(draw(g, opts.min_prefixes, opts.max_prefixes));
    std::vector<Prefix> globals;
    for (int k = 0; k < prefixes; ++k) {
        Prefix p{Address((10U << 24) | (static_cast<std::uint32_t>(k + 1) << 16)), 16};
        globals.push_back(p);
        const int at = opts.min_diameter > 0 && k == 0 ? 0 : static_cast<int>(draw(g, 0, n - 1));
        s.topology.prefixes.push_back({p, rid(at)});
        s.topology.hosts["srv" + std::to_string(k)] = HostSpec{rid(at), HostRole::server, Address(p.base.value + 1), true};
    }
    for (int k = 0; k < n; ++k)
        s.topology.hosts["h" + rid(k).substr(1)] = HostSpec{rid(k), HostRole::client, std::nullopt, true};

    if (opts.inject_cycle) {
        auto [u, v] = extra[draw(g, 0, extra.size() - 1)];
        auto cyc = tree_path(parent, u, v);
        std::rotate(cyc.begin(), cyc.begin() + static_cast<long>(draw(g, 0, cyc.size() - 1)), cyc.end());
        CycleInjection c;
        for (int k : cyc)
            c.routers.push_back(rid(k));
        c.prefix = globals[draw(g, 0, globals.size() - 1)];
        s.perturbations.push_back({0, c});
    }
    if (opts.stale_overrides) {
        const int count = static_cast<int>(draw(g, 1, 3));
        for (int k = 0; k < count; ++k)
            s.perturbations.push_back(
                {0, StaleDistance{rid(static_cast<int>(draw(g, 0, n - 1))), globals[draw(g, 0, globals.size() - 1)],
                                  static_cast<std::uint32_t>(draw(g, 0, n))}});
    }

    for (int k = 0; k < n; ++k)
        for (int p = 0; p < prefixes; ++p)
            s.traffic.push_back({1 + static_cast<Tick>(k), "h" + rid(k).substr(1), Address(globals[p].base.value + 1), "f"});
    return s;
}

std::map<NodeId, std::map<NodeId, std::uint32_t>> all_pairs_hops(const Topology &topo)
{
    std::map<NodeId, std::vector<NodeId>> adj;
    for (const auto &[a, b] : topo.links) {
        if (!topo.routers.at(a).compliant || !topo.routers.at(b).compliant)
            continue;
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::map<NodeId, std::map<NodeId, std::uint32_t>> out;
    for (const auto &[src, spec] : topo.routers) {
        if (!spec.compliant)
            continue;
        auto &dist = out[src];
        dist[src] = 0;
        std::deque<NodeId> q{src};
        while (!q.empty()) {
            NodeId u = q.front();
            q.pop_front();
            for (const auto &w : adj[u])
                if (!dist.count(w)) {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
        }
    }
    return out;
}

std::uint32_t diameter(const Topology &topo)
{
    std::uint32_t d = 0;
    for (const auto &[_, row] : all_pairs_hops(topo))
        for (const auto &[__, h] : row)
            d = std::max(d, h);
    return d;
}

std::vector<NodeId> router_path(const World &world, const HopTrace &trace)
{
    std::vector<NodeId> out;
    for (const auto &n : trace.node_path())
        if (world.is_compliant_router(n))
            out.push_back(n);
    return out;
}

std::vector<DeliveredFlow> delivered_flows(const World &world)
{
    std::vector<DeliveredFlow> out;
    for (const auto &[id, t] : world.traces()) {
        if (t.direction != Direction::forward || t.adversarial || !world.is_host(t.originator))
            continue;
        if (!t.terminal || t.terminal->verdict.action != Action::delivered || t.hops.empty())
            continue;
        const auto &last = t.hops.back();
        if (!world.is_host(last.to))
            continue;
        out.push_back({id, t.originator, t.terminal->node, last.src, router_path(world, t)});
    }
    return out;
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace pear::testing
