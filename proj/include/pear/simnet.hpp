#pragma once

// Deterministic discrete-event simulation of one world: unit-latency links,
// host and adversary traffic, full link capture and per-datagram traces.

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pear/datapath.hpp"
#include "pear/rng.hpp"
#include "pear/scenario.hpp"

namespace pear {

// One link traversal, exactly as seen on the wire.
struct TraceEntry {
    Tick tick = 0;
    NodeId from;
    NodeId to;
    Address src;
    Address dst;
    std::uint32_t ttl = 0;
    Address origin;
    TraceId id = 0;
};

enum class Direction { forward, reverse };

struct VerdictRecord {
    TraceId id = 0;
    Tick tick = 0;
    NodeId node;
    Verdict verdict;
};

struct HopTrace {
    TraceId id = 0;
    NodeId originator;
    Direction direction = Direction::forward;
    bool adversarial = false;
    std::vector<TraceEntry> hops;
    std::optional<VerdictRecord> terminal;

    // originator followed by the receiving node of every hop
    std::vector<NodeId> node_path() const;
    // nodes that accepted the datagram and sent it on, originator excluded
    std::vector<NodeId> forwarders() const;
};

struct Metrics {
    std::map<Reason, std::uint64_t> dropped_by_reason;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t handed_to_hosts = 0;
    std::uint64_t injected = 0;
    std::uint64_t link_traversals = 0;
    std::uint64_t in_flight = 0;
    std::uint64_t loop_hops = 0;
    std::uint64_t hrt_collisions = 0;
    std::uint64_t drt_collisions = 0;
    std::uint64_t evictions = 0;
    std::map<NodeId, std::size_t> hrt_high_water;
    std::map<NodeId, std::size_t> drt_high_water;
};

// Number of hops whose receiving node already appeared earlier in the trace.
std::uint64_t loop_hops(const HopTrace &trace);

class World {
public:
    // Builds routers, assigns host addresses and FIBs, and schedules the
    // scenario's traffic, perturbations and adversaries. Throws ConfigError.
    explicit World(Scenario scenario);

    // Schedules a datagram from `host` at tick `at` (default: now).
    TraceId host_send(const NodeId &host, Address dst, std::string payload, std::optional<Tick> at = {});

    // Processes events in (tick, insertion) order up to and including `until`.
    void run(Tick until);
    void run() { run(scenario_.limits.until); }

    Tick now() const { return now_; }
    const Scenario &scenario() const { return scenario_; }

    const std::vector<TraceEntry> &link_log() const { return link_log_; }
    std::vector<TraceEntry> observe_link(const NodeId &from, const NodeId &to) const;
    const std::map<TraceId, HopTrace> &traces() const { return traces_; }
    const std::vector<VerdictRecord> &verdicts() const { return verdicts_; }
    Metrics metrics() const;

    const Router *router(const NodeId &id) const;
    Router *router(const NodeId &id);
    const std::map<NodeId, Router> &routers() const { return routers_; }
    std::optional<Address> host_address(const NodeId &host) const;
    bool is_host(const NodeId &id) const;
    bool is_compliant_router(const NodeId &id) const { return routers_.count(id) != 0; }

private:
    struct Send {
        NodeId host;
        Address dst;
        std::string payload;
        TraceId id;
    };
    struct Arrival {
        NodeId at;
        NodeId from;
        bool from_host;
        Datagram dgram;
    };
    struct Perturb {
        std::size_t index;
    };
    struct Inject {
        std::size_t adversary;
    };
    struct Event {
        Tick tick;
        std::uint64_t seq;
        std::variant<Send, Arrival, Perturb, Inject> body;
    };
    struct Later {
        bool operator()(const Event &a, const Event &b) const
        {
            return a.tick != b.tick ? a.tick > b.tick : a.seq > b.seq;
        }
    };

    void schedule(Tick at, decltype(Event::body) body);
    void advance_to(Tick t);
    void handle(const Send &e);
    void handle(Arrival &e);
    void handle(const Perturb &e);
    void handle(const Inject &e);

    TraceId open_trace(const NodeId &originator, Direction dir, bool adversarial);
    void transmit(const NodeId &from, const NodeId &to, Datagram d);
    void finish(const Datagram &d, const NodeId &node, Verdict v);
    Address forge(ForgePolicy policy, const LocalInterval &target);
    FibSet collect_fibs() const;

    Scenario scenario_;
    Rng rng_;
    std::vector<Prefix> global_prefixes_;
    std::map<NodeId, Router> routers_;
    std::map<NodeId, Address> host_addresses_;
    std::map<NodeId, NodeId> adversary_routers_;  // id -> attach

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    Tick now_ = 0;
    TraceId next_trace_ = 1;

    std::vector<TraceEntry> link_log_;
    std::map<TraceId, HopTrace> traces_;
    std::vector<VerdictRecord> verdicts_;
    std::uint64_t forwarded_ = 0;
    std::uint64_t delivered_emissions_ = 0;
    std::uint64_t injected_ = 0;
    std::uint64_t evictions_ = 0;
};

// Post-run consistency checks. Returns one message per violation.
std::vector<std::string> check_invariants(const World &world);

}  // namespace pear
