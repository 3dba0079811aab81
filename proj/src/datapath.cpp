#include "pear/datapath.hpp"

#include <algorithm>

#include "pear/rng.hpp"

namespace pear {

namespace {

bool in_global_prefix(Address a, const std::vector<Prefix> &prefixes)
{
    return std::any_of(prefixes.begin(), prefixes.end(), [a](const Prefix &p) { return p.contains(a); });
}

}  // namespace

const char *to_string(Mode m) { return m == Mode::tfr ? "tfr" : "baseline"; }

std::optional<Mode> parse_mode(const std::string &text)
{
    if (text == "tfr")
        return Mode::tfr;
    if (text == "baseline")
        return Mode::baseline;
    return std::nullopt;
}

const char *to_string(Action a)
{
    switch (a) {
    case Action::delivered:
        return "delivered";
    case Action::forwarded:
        return "forwarded";
    case Action::dropped:
        return "dropped";
    }
    return "?";
}

const char *to_string(Reason r)
{
    switch (r) {
    case Reason::ok:
        return "ok";
    case Reason::tfr_reject:
        return "tfr_reject";
    case Reason::no_route:
        return "no_route";
    case Reason::no_hrt_state:
        return "no_hrt_state";
    case Reason::no_drt_state:
        return "no_drt_state";
    case Reason::bad_provenance:
        return "bad_provenance";
    case Reason::ttl_expired:
        return "ttl_expired";
    case Reason::table_exhausted:
        return "table_exhausted";
    }
    return "?";
}

const char *to_string(Classification c)
{
    switch (c) {
    case Classification::forward_global:
        return "forward_global";
    case Classification::reverse_local:
        return "reverse_local";
    case Classification::reverse_from_host:
        return "reverse_from_host";
    case Classification::invalid:
        return "invalid";
    }
    return "?";
}

std::optional<std::uint32_t> tfr_accept(std::uint32_t distance, std::uint32_t ttl)
{
    if (ttl > distance)
        return distance;
    return std::nullopt;
}

Router::Router(NodeId id, ListTable list, SecretOffset secret)
    : id_(std::move(id)), list_(std::move(list)), secret_(secret)
{
}

void Router::attach_host(const NodeId &host, Address assigned)
{
    hosts_[host] = assigned;
    host_by_address_[assigned] = host;
}

std::optional<Address> Router::host_address(const NodeId &host) const
{
    auto it = hosts_.find(host);
    if (it == hosts_.end())
        return std::nullopt;
    return it->second;
}

std::optional<NodeId> Router::host_with_address(Address a) const
{
    auto it = host_by_address_.find(a);
    if (it == host_by_address_.end())
        return std::nullopt;
    return it->second;
}

const LocalInterval &Router::neighbor_interval(const NodeId &n) const
{
    auto it = list_.neighbors.find(n);
    if (it == list_.neighbors.end())
        throw AddressDomainError("router " + id_ + " has no interval for " + n);
    return it->second;
}

Address Router::map_toward(const NodeId &neighbor, Address own_address) const
{
    return map_out(secret_, list_.own, neighbor_interval(neighbor), own_address);
}

Address Router::invert_from(const NodeId &neighbor, Address neighbor_address) const
{
    return map_in(secret_, list_.own, neighbor_interval(neighbor), neighbor_address);
}

void Router::note_occupancy()
{
    hrt_hwm_ = std::max(hrt_hwm_, hrt_.size());
    drt_hwm_ = std::max(drt_hwm_, drt_.size());
}

Classification Router::classify_from_router(const NodeId &from, const Datagram &d,
                                            const std::vector<Prefix> &global_prefixes) const
{
    auto it = list_.neighbors.find(from);
    if (it != list_.neighbors.end() && it->second.contains(d.dst))
        return Classification::reverse_local;
    if (in_global_prefix(d.dst, global_prefixes))
        return Classification::forward_global;
    return Classification::invalid;
}

Classification Router::classify_from_host(const Datagram &d, const std::vector<Prefix> &global_prefixes) const
{
    if (list_.own.contains(d.dst))
        return Classification::reverse_from_host;
    if (in_global_prefix(d.dst, global_prefixes))
        return Classification::forward_global;
    return Classification::invalid;
}

StepResult Router::receive(const NodeId &from, bool from_host, Datagram d, RouterContext &ctx)
{
    if (ctx.mode == Mode::baseline)
        return baseline_forward(from, std::move(d));
    if (from_host)
        return ingress_from_host(from, std::move(d), ctx);
    switch (classify_from_router(from, d, *ctx.global_prefixes)) {
    case Classification::reverse_local:
        return relay_reverse(from, std::move(d), ctx);
    case Classification::forward_global:
        return relay_forward(from, std::move(d), ctx);
    default:
        return {Verdict::drop(Reason::no_route), std::nullopt};
    }
}

StepResult Router::deliver_local(const NodeId &host, Datagram d) const
{
    return {Verdict::delivered(), Emission{host, true, std::move(d)}};
}

StepResult Router::ingress_from_host(const NodeId &host, Datagram d, RouterContext &ctx)
{
    auto assigned = host_address(host);
    if (!assigned || d.src != *assigned)
        return {Verdict::drop(Reason::bad_provenance, host), std::nullopt};

    switch (classify_from_host(d, *ctx.global_prefixes)) {
    case Classification::reverse_from_host:
        return egress_reverse_initiate(host, std::move(d), ctx);
    case Classification::forward_global:
        break;
    default:
        return {Verdict::drop(Reason::no_route), std::nullopt};
    }

    auto route = fib_.lookup(d.dst);
    if (!route)
        return {Verdict::drop(Reason::no_route), std::nullopt};

    try {
        if (route->attached()) {
            // source and destination share this router: identity mappings
            auto target = host_with_address(d.dst);
            if (!target)
                return {Verdict::drop(Reason::no_route), std::nullopt};
            auto alloc = hrt_.find_or_alloc(d.src, host, list_.own, *ctx.rng, ctx.now);
            drt_.upsert(d.src, alloc.hip, ctx.now);
            note_occupancy();
            d.origin = d.src;
            return deliver_local(*target, std::move(d));
        }

        auto ttl = tfr_accept(route->distance, d.ttl);
        if (!ttl)
            return {Verdict::drop(Reason::tfr_reject), std::nullopt};
        const NodeId &next = *route->next_hop;
        if (!list_.neighbors.count(next))
            return {Verdict::drop(Reason::no_route), std::nullopt};
        auto alloc = hrt_.find_or_alloc(d.src, host, list_.own, *ctx.rng, ctx.now);
        note_occupancy();
        Datagram out = std::move(d);
        out.origin = map_toward(next, out.src);
        out.src = map_toward(next, alloc.hip);
        out.ttl = *ttl;
        return {Verdict::forwarded(), Emission{next, false, std::move(out)}};
    } catch (const ExhaustedError &) {
        return {Verdict::drop(Reason::table_exhausted), std::nullopt};
    }
}

StepResult Router::relay_forward(const NodeId &from, Datagram d, RouterContext &ctx)
{
    if (!list_.own.contains(d.src) || !list_.own.contains(d.origin))
        return {Verdict::drop(Reason::bad_provenance, from), std::nullopt};

    auto route = fib_.lookup(d.dst);
    if (!route)
        return {Verdict::drop(Reason::no_route), std::nullopt};

    auto ttl = tfr_accept(route->distance, d.ttl);
    if (!ttl)
        return {Verdict::drop(Reason::tfr_reject), std::nullopt};

    if (route->attached())
        return egress_deliver(from, std::move(d), ctx);

    const NodeId &next = *route->next_hop;
    if (!list_.neighbors.count(next))
        return {Verdict::drop(Reason::no_route), std::nullopt};
    try {
        auto alloc = hrt_.find_or_alloc(d.src, from, list_.own, *ctx.rng, ctx.now);
        note_occupancy();
        Datagram out = std::move(d);
        out.src = map_toward(next, alloc.hip);
        out.origin = map_toward(next, out.origin);
        out.ttl = *ttl;
        return {Verdict::forwarded(), Emission{next, false, std::move(out)}};
    } catch (const ExhaustedError &) {
        return {Verdict::drop(Reason::table_exhausted), std::nullopt};
    }
}

StepResult Router::egress_deliver(const NodeId &from, Datagram d, RouterContext &ctx)
{
    if (!list_.own.contains(d.src) || !list_.own.contains(d.origin))
        return {Verdict::drop(Reason::bad_provenance, from), std::nullopt};
    auto target = host_with_address(d.dst);
    if (!target)
        return {Verdict::drop(Reason::no_route), std::nullopt};
    try {
        // the DRT alone has no next hop; anchor the reverse path in the HRT
        auto alloc = hrt_.find_or_alloc(d.src, from, list_.own, *ctx.rng, ctx.now);
        drt_.upsert(d.origin, alloc.hip, ctx.now);
        note_occupancy();
    } catch (const ExhaustedError &) {
        return {Verdict::drop(Reason::table_exhausted), std::nullopt};
    }
    Datagram out = std::move(d);
    out.src = out.origin;
    return deliver_local(*target, std::move(out));
}

StepResult Router::egress_reverse_initiate([[maybe_unused]] const NodeId &host, Datagram d, RouterContext &ctx)
{
    auto hip = drt_.lookup(d.dst);
    if (!hip)
        return {Verdict::drop(Reason::no_drt_state), std::nullopt};
    auto entry = hrt_.lookup(*hip);
    if (!entry)
        return {Verdict::drop(Reason::no_hrt_state), std::nullopt};
    drt_.touch(d.dst, ctx.now);
    hrt_.touch(*hip, ctx.now);

    Datagram out = std::move(d);
    out.origin = out.dst;
    out.dst = entry->map;
    if (has_host(entry->next_hop))
        return deliver_local(entry->next_hop, std::move(out));
    out.ttl = ctx.reverse_ttl;
    return {Verdict::forwarded(), Emission{entry->next_hop, false, std::move(out)}};
}

StepResult Router::relay_reverse(const NodeId &from, Datagram d, RouterContext &ctx)
{
    Address origin;
    try {
        origin = invert_from(from, d.origin);
    } catch (const AddressDomainError &) {
        return {Verdict::drop(Reason::bad_provenance, from), std::nullopt};
    }
    const Address index = invert_from(from, d.dst);
    auto entry = hrt_.lookup(index);
    if (!entry)
        return {Verdict::drop(Reason::no_hrt_state), std::nullopt};
    if (d.ttl <= 1)
        return {Verdict::drop(Reason::ttl_expired), std::nullopt};
    hrt_.touch(index, ctx.now);

    Datagram out = std::move(d);
    out.ttl -= 1;
    if (has_host(entry->next_hop)) {
        out.dst = origin;
        out.origin = origin;
        return deliver_local(entry->next_hop, std::move(out));
    }
    out.dst = entry->map;
    out.origin = origin;
    return {Verdict::forwarded(), Emission{entry->next_hop, false, std::move(out)}};
}

StepResult Router::baseline_forward([[maybe_unused]] const NodeId &from, Datagram d)
{
    auto route = fib_.lookup(d.dst);
    if (!route)
        return {Verdict::drop(Reason::no_route), std::nullopt};
    if (d.ttl <= 1)
        return {Verdict::drop(Reason::ttl_expired), std::nullopt};
    d.ttl -= 1;
    if (route->attached()) {
        auto target = host_with_address(d.dst);
        if (!target)
            return {Verdict::drop(Reason::no_route), std::nullopt};
        return deliver_local(*target, std::move(d));
    }
    const NodeId next = *route->next_hop;
    return {Verdict::forwarded(), Emission{next, false, std::move(d)}};
}

}  // namespace pear
