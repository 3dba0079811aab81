#include "pear/control.hpp"

#include <deque>

namespace pear {

void Topology::add_link(const NodeId &a, const NodeId &b)
{
    if (a == b)
        throw ConfigError("self link at " + a);
    links.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
}

bool Topology::adjacent(const NodeId &a, const NodeId &b) const
{
    return links.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) != 0;
}

std::vector<NodeId> Topology::neighbors(const NodeId &id) const
{
    std::set<NodeId> out;
    for (const auto &[a, b] : links) {
        if (a == id)
            out.insert(b);
        else if (b == id)
            out.insert(a);
    }
    return {out.begin(), out.end()};
}

bool Topology::compliant(const NodeId &id) const
{
    auto it = routers.find(id);
    return it != routers.end() && it->second.compliant;
}

LocalInterval Topology::interval_of(const NodeId &router) const
{
    auto it = routers.find(router);
    if (it == routers.end())
        throw ConfigError("unknown router " + router);
    return {it->second.interval_start, interval_length};
}

std::map<NodeId, ListTable> Topology::list_tables() const
{
    std::map<NodeId, ListTable> out;
    for (const auto &[id, spec] : routers) {
        ListTable t{interval_of(id), {}};
        for (const auto &n : neighbors(id))
            if (routers.count(n))
                t.neighbors.emplace(n, interval_of(n));
        out.emplace(id, std::move(t));
    }
    return out;
}

std::vector<Prefix> Topology::global_prefixes() const
{
    std::vector<Prefix> out;
    for (const auto &pa : prefixes)
        out.push_back(pa.prefix);
    return out;
}

std::optional<NodeId> Topology::attachment_of(const Prefix &p) const
{
    for (const auto &pa : prefixes)
        if (pa.prefix == p)
            return pa.router;
    return std::nullopt;
}

TopologyReport validate_topology(const Topology &topo)
{
    TopologyReport report;
    for (const auto &[a, b] : topo.links)
        for (const auto &end : {a, b})
            if (!topo.routers.count(end))
                report.errors.push_back({"@link:" + a + "-" + b, "link " + a + "-" + b + " references unknown router " + end});

    std::map<Prefix, NodeId> attached;
    for (const auto &pa : topo.prefixes) {
        if (!topo.routers.count(pa.router))
            report.errors.push_back({"@prefix:" + to_string(pa.prefix), "prefix " + to_string(pa.prefix) + " attached to unknown router " + pa.router});
        else if (!topo.compliant(pa.router))
            report.errors.push_back({"@prefix:" + to_string(pa.prefix), "prefix " + to_string(pa.prefix) + " attached to adversary " + pa.router});
        auto [it, fresh] = attached.emplace(pa.prefix, pa.router);
        if (!fresh)
            report.errors.push_back({"@prefix:" + to_string(pa.prefix),
                                     "prefix " + to_string(pa.prefix) + " attached to both " + it->second + " and " +
                                         pa.router});
    }

    std::set<Address> addresses;
    for (const auto &[id, h] : topo.hosts) {
        if (!topo.routers.count(h.router)) {
            report.errors.push_back({id, "host " + id + " attached to unknown router " + h.router});
            continue;
        }
        if (topo.routers.count(id))
            report.errors.push_back({id, "host " + id + " shares its id with a router"});
        if (h.role == HostRole::server) {
            if (!h.address) {
                report.errors.push_back({id, "server " + id + " needs a global address"});
                continue;
            }
            bool covered = false;
            for (const auto &pa : topo.prefixes)
                if (pa.router == h.router && pa.prefix.contains(*h.address))
                    covered = true;
            if (!covered)
                report.errors.push_back({id, "server " + id + " address " + to_string(*h.address) +
                                        " is not in a prefix attached to " + h.router});
        } else if (h.address && !topo.interval_of(h.router).contains(*h.address)) {
            report.errors.push_back({id, "client " + id + " address " + to_string(*h.address) + " is outside " +
                                    to_string(topo.interval_of(h.router)) + " of " + h.router});
        }
        if (h.address && !addresses.insert(*h.address).second)
            report.errors.push_back({id, "host " + id + " reuses address " + to_string(*h.address)});
    }

    // connectivity of the compliant graph
    if (!topo.routers.empty()) {
        std::optional<NodeId> first;
        std::size_t compliant = 0;
        for (const auto &[id, spec] : topo.routers)
            if (spec.compliant) {
                ++compliant;
                if (!first)
                    first = id;
            }
        if (first && hop_distances(topo, *first).size() != compliant)
            report.warnings.push_back("compliant router graph is not connected");
    }
    return report;
}

std::map<NodeId, std::uint32_t> hop_distances(const Topology &topo, const NodeId &source)
{
    std::map<NodeId, std::uint32_t> dist;
    if (!topo.compliant(source))
        return dist;
    std::deque<NodeId> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        for (const auto &v : topo.neighbors(u)) {
            if (!topo.compliant(v) || dist.count(v))
                continue;
            dist[v] = dist[u] + 1;
            queue.push_back(v);
        }
    }
    return dist;
}

FibSet build_fibs(const Topology &topo)
{
    FibSet fibs;
    for (const auto &[id, spec] : topo.routers)
        if (spec.compliant)
            fibs[id];
    for (const auto &pa : topo.prefixes) {
        auto dist = hop_distances(topo, pa.router);
        for (const auto &[id, d] : dist) {
            FibEntry e{pa.prefix, std::nullopt, d};
            if (d > 0) {
                for (const auto &n : topo.neighbors(id)) {  // ascending: lowest id wins
                    auto it = dist.find(n);
                    if (it != dist.end() && it->second + 1 == d) {
                        e.next_hop = n;
                        break;
                    }
                }
            }
            fibs[id].upsert(std::move(e));
        }
    }
    return fibs;
}

void inject_fib_cycle(FibSet &fibs, const Topology &topo, const std::vector<NodeId> &cycle, const Prefix &prefix)
{
    if (cycle.size() < 2)
        throw ConfigError("cycle needs at least two routers");
    if (!topo.attachment_of(prefix))
        throw ConfigError("cycle references unknown prefix " + to_string(prefix));
    for (std::size_t k = 0; k < cycle.size(); ++k) {
        const auto &from = cycle[k];
        const auto &to = cycle[(k + 1) % cycle.size()];
        if (!topo.adjacent(from, to))
            throw ConfigError("cycle members " + from + " and " + to + " are not adjacent");
        if (!fibs.count(from) || !fibs.count(to))
            throw ConfigError("cycle member is not a compliant router");
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
        auto &fib = fibs.at(cycle[k]);
        FibEntry *e = fib.find(prefix);
        if (!e)
            throw ConfigError("router " + cycle[k] + " has no FIB entry for " + to_string(prefix));
        e->next_hop = cycle[(k + 1) % cycle.size()];
    }
}

void set_stale_distances(FibSet &fibs, const DistanceOverrides &overrides)
{
    for (const auto &[key, distance] : overrides) {
        const auto &[router, prefix] = key;
        auto it = fibs.find(router);
        FibEntry *e = it == fibs.end() ? nullptr : it->second.find(prefix);
        if (!e)
            throw ConfigError("no FIB entry for " + to_string(prefix) + " at " + router);
        e->distance = distance;
    }
}

}  // namespace pear
