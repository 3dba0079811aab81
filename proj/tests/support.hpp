#pragma once

// Helpers shared by unit tests and the acceptance binary: seeded random
// worlds, graph oracles written independently of the library, and trace
// utilities.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pear/simnet.hpp"

namespace pear::testing {

struct RandomWorldOptions {
    int min_routers = 4;
    int max_routers = 12;
    int min_prefixes = 1;
    int max_prefixes = 3;
    std::uint32_t interval_length = 1U << 20;
    bool inject_cycle = true;
    bool stale_overrides = true;
    int min_diameter = 0;  // regenerate the graph until its diameter reaches this
    Mode mode = Mode::tfr;
};

// Builds a connected random topology with one client per router and one
// echoing server per prefix. Every client sends to every server.
Scenario random_scenario(std::uint64_t seed, const RandomWorldOptions &opts = {});

// Plain BFS over an adjacency list built from the topology's links,
// restricted to compliant routers.
std::map<NodeId, std::map<NodeId, std::uint32_t>> all_pairs_hops(const Topology &topo);
std::uint32_t diameter(const Topology &topo);

// Routers visited by a trace, in order, hosts and adversaries stripped.
std::vector<NodeId> router_path(const World &world, const HopTrace &trace);

// Forward traces from a client host that reached a server.
struct DeliveredFlow {
    TraceId id = 0;
    NodeId host;
    NodeId egress;
    Address origin;  // as handed to the server
    std::vector<NodeId> path;
};
std::vector<DeliveredFlow> delivered_flows(const World &world);

std::string read_file(const std::string &path);

}  // namespace pear::testing
