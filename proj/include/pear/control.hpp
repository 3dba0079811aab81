#pragma once

// Topology model, min-hop FIB construction and adversarial FIB perturbation.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pear/addressing.hpp"
#include "pear/tables.hpp"

namespace pear {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RouterSpec {
    Address interval_start;
    SecretOffset secret;
    bool compliant = true;  // false for adversary routers
};

enum class HostRole { client, server };

struct HostSpec {
    NodeId router;
    HostRole role = HostRole::client;
    std::optional<Address> address;  // required for servers (global scope)
    bool echo = true;                // servers answer every delivered datagram
};

struct PrefixAttachment {
    Prefix prefix;
    NodeId router;
};

struct Topology {
    std::uint32_t interval_length = 0;
    std::map<NodeId, RouterSpec> routers;
    std::set<std::pair<NodeId, NodeId>> links;  // stored with first < second
    std::map<NodeId, HostSpec> hosts;
    std::vector<PrefixAttachment> prefixes;

    void add_link(const NodeId &a, const NodeId &b);
    bool adjacent(const NodeId &a, const NodeId &b) const;
    std::vector<NodeId> neighbors(const NodeId &id) const;  // ascending
    bool compliant(const NodeId &id) const;

    LocalInterval interval_of(const NodeId &router) const;
    std::map<NodeId, ListTable> list_tables() const;
    std::vector<Prefix> global_prefixes() const;
    std::optional<NodeId> attachment_of(const Prefix &p) const;
};

struct TopologyIssue {
    std::string subject;  // host id, "@link:a-b" or "@prefix:<prefix>"
    std::string message;
};

struct TopologyReport {
    std::vector<TopologyIssue> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
};

TopologyReport validate_topology(const Topology &topo);

using FibSet = std::map<NodeId, Fib>;

// Min-hop FIBs over the compliant routers. Ties go to the lowest router id.
FibSet build_fibs(const Topology &topo);

// Hop distances from `source` over compliant routers (absent = unreachable).
std::map<NodeId, std::uint32_t> hop_distances(const Topology &topo, const NodeId &source);

// Rewrites next hops so that cycle[k] forwards `prefix` to cycle[k+1],
// wrapping around. Distances are left alone.
void inject_fib_cycle(FibSet &fibs, const Topology &topo, const std::vector<NodeId> &cycle, const Prefix &prefix);

using DistanceOverrides = std::map<std::pair<NodeId, Prefix>, std::uint32_t>;

void set_stale_distances(FibSet &fibs, const DistanceOverrides &overrides);

}  // namespace pear
