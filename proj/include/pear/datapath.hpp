#pragma once

// Per-router packet processing. A Router owns its LIST, secret offset and
// tables, and turns one arriving datagram into one verdict plus at most one
// emission. Timing, links and traces belong to the simulator.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pear/addressing.hpp"
#include "pear/tables.hpp"

namespace pear {

class Rng;

enum class Mode { tfr, baseline };

const char *to_string(Mode m);
std::optional<Mode> parse_mode(const std::string &text);

enum class Action { delivered, forwarded, dropped };

enum class Reason {
    ok,
    tfr_reject,
    no_route,
    no_hrt_state,
    no_drt_state,
    bad_provenance,
    ttl_expired,
    table_exhausted,
};

inline constexpr Reason kAllReasons[] = {Reason::ok,           Reason::tfr_reject,    Reason::no_route,
                                         Reason::no_hrt_state, Reason::no_drt_state,  Reason::bad_provenance,
                                         Reason::ttl_expired,  Reason::table_exhausted};

const char *to_string(Action a);
const char *to_string(Reason r);

struct Verdict {
    Action action = Action::dropped;
    Reason reason = Reason::ok;
    std::optional<NodeId> offending_neighbor;  // always set for bad_provenance

    static Verdict forwarded() { return {Action::forwarded, Reason::ok, std::nullopt}; }
    static Verdict delivered() { return {Action::delivered, Reason::ok, std::nullopt}; }
    static Verdict drop(Reason r, std::optional<NodeId> offending = std::nullopt)
    {
        return {Action::dropped, r, std::move(offending)};
    }

    bool terminal() const { return action != Action::forwarded; }
};

using TraceId = std::uint64_t;

inline constexpr std::uint32_t kHostDefaultTtl = 64;
inline constexpr std::uint32_t kReverseInitialTtl = 64;

struct Datagram {
    Address src;
    Address dst;
    std::uint32_t ttl = kHostDefaultTtl;
    Address origin;
    std::string payload;
    TraceId trace_id = 0;
};

enum class Classification { forward_global, reverse_local, reverse_from_host, invalid };

const char *to_string(Classification c);

struct Emission {
    NodeId to;
    bool to_host = false;
    Datagram dgram;
};

struct StepResult {
    Verdict verdict;
    std::optional<Emission> emit;
};

struct RouterContext {
    Mode mode = Mode::tfr;
    Tick now = 0;
    Rng *rng = nullptr;
    const std::vector<Prefix> *global_prefixes = nullptr;
    std::uint32_t reverse_ttl = kReverseInitialTtl;
};

// TFR acceptance: a datagram carrying ttl T toward a prefix at distance H is
// accepted iff T > H, and leaves with ttl exactly H.
std::optional<std::uint32_t> tfr_accept(std::uint32_t distance, std::uint32_t ttl);

class Router {
public:
    Router(NodeId id, ListTable list, SecretOffset secret);

    const NodeId &id() const { return id_; }
    const ListTable &list() const { return list_; }
    const LocalInterval &own() const { return list_.own; }

    Fib &fib() { return fib_; }
    const Fib &fib() const { return fib_; }
    Hrt &hrt() { return hrt_; }
    const Hrt &hrt() const { return hrt_; }
    Drt &drt() { return drt_; }
    const Drt &drt() const { return drt_; }

    void attach_host(const NodeId &host, Address assigned);
    std::optional<Address> host_address(const NodeId &host) const;
    std::optional<NodeId> host_with_address(Address a) const;
    bool has_host(const NodeId &host) const { return hosts_.count(host) != 0; }
    const std::map<NodeId, Address> &hosts() const { return hosts_; }

    Classification classify_from_router(const NodeId &from, const Datagram &d,
                                        const std::vector<Prefix> &global_prefixes) const;
    Classification classify_from_host(const Datagram &d, const std::vector<Prefix> &global_prefixes) const;

    // Dispatches on mode and classification.
    StepResult receive(const NodeId &from, bool from_host, Datagram d, RouterContext &ctx);

    StepResult ingress_from_host(const NodeId &host, Datagram d, RouterContext &ctx);
    StepResult relay_forward(const NodeId &from, Datagram d, RouterContext &ctx);
    StepResult egress_deliver(const NodeId &from, Datagram d, RouterContext &ctx);
    StepResult egress_reverse_initiate(const NodeId &host, Datagram d, RouterContext &ctx);
    StepResult relay_reverse(const NodeId &from, Datagram d, RouterContext &ctx);
    StepResult baseline_forward(const NodeId &from, Datagram d);

    // Swap toward / back from a neighbor using this router's secret. Used by
    // the datapath and by cooperative traceback; the secret itself never
    // leaves the router.
    Address map_toward(const NodeId &neighbor, Address own_address) const;
    Address invert_from(const NodeId &neighbor, Address neighbor_address) const;

    std::size_t hrt_high_water() const { return hrt_hwm_; }
    std::size_t drt_high_water() const { return drt_hwm_; }

private:
    const LocalInterval &neighbor_interval(const NodeId &n) const;
    StepResult deliver_local(const NodeId &host, Datagram d) const;
    void note_occupancy();

    NodeId id_;
    ListTable list_;
    SecretOffset secret_;
    Fib fib_;
    Hrt hrt_;
    Drt drt_;
    std::map<NodeId, Address> hosts_;
    std::map<Address, NodeId> host_by_address_;
    std::size_t hrt_hwm_ = 0;
    std::size_t drt_hwm_ = 0;
};

}  // namespace pear
