#include "pear/simnet.hpp"

#include <algorithm>

namespace pear {

std::vector<NodeId> HopTrace::node_path() const
{
    std::vector<NodeId> out{originator};
    for (const auto &h : hops)
        out.push_back(h.to);
    return out;
}

std::vector<NodeId> HopTrace::forwarders() const
{
    std::vector<NodeId> out;
    for (std::size_t k = 1; k < hops.size(); ++k)
        out.push_back(hops[k].from);
    return out;
}

std::uint64_t loop_hops(const HopTrace &trace)
{
    std::set<NodeId> seen{trace.originator};
    std::uint64_t repeats = 0;
    for (const auto &h : trace.hops) {
        seen.insert(h.from);
        if (!seen.insert(h.to).second)
            ++repeats;
    }
    return repeats;
}

World::World(Scenario scenario) : scenario_(std::move(scenario)), rng_(scenario_.seed)
{
    if (auto errors = validate_scenario(scenario_); !errors.empty())
        throw ConfigError(to_string(errors.front()));

    const auto &topo = scenario_.topology;
    global_prefixes_ = topo.global_prefixes();

    auto lists = topo.list_tables();
    for (const auto &[id, spec] : topo.routers) {
        if (spec.compliant)
            routers_.emplace(id, Router(id, lists.at(id), spec.secret));
        else
            adversary_routers_.emplace(id, NodeId{});
    }

    // pinned addresses first so random draws avoid them
    std::map<NodeId, std::set<Address>> occupied;
    for (const auto &[id, h] : topo.hosts)
        if (h.address) {
            occupied[h.router].insert(*h.address);
            host_addresses_[id] = *h.address;
        }
    for (const auto &[id, h] : topo.hosts)
        if (!h.address)
            host_addresses_[id] = assign_host_address(lists.at(h.router), occupied[h.router], rng_);
    for (const auto &[id, h] : topo.hosts)
        routers_.at(h.router).attach_host(id, host_addresses_.at(id));

    for (auto &[id, fib] : build_fibs(topo))
        routers_.at(id).fib() = std::move(fib);

    for (std::size_t i = 0; i < scenario_.perturbations.size(); ++i)
        schedule(scenario_.perturbations[i].tick, Perturb{i});
    for (const auto &t : scenario_.traffic)
        host_send(t.host, t.dst, t.payload, t.tick);
    for (std::size_t i = 0; i < scenario_.adversaries.size(); ++i) {
        auto &a = scenario_.adversaries[i];
        if (a.kind != AdversaryKind::spoofing_host)
            adversary_routers_[a.id] = a.attach;
        for (std::uint32_t k = 0; k < a.count; ++k)
            schedule(a.start + Tick{k} * a.period, Inject{i});
    }
}

void World::schedule(Tick at, decltype(Event::body) body) { queue_.push(Event{at, seq_++, std::move(body)}); }

TraceId World::host_send(const NodeId &host, Address dst, std::string payload, std::optional<Tick> at)
{
    if (!host_addresses_.count(host))
        throw ConfigError("unknown host " + host);
    TraceId id = next_trace_++;
    schedule(at.value_or(now_), Send{host, dst, std::move(payload), id});
    return id;
}

void World::run(Tick until)
{
    while (!queue_.empty() && queue_.top().tick <= until) {
        Event ev = queue_.top();
        queue_.pop();
        advance_to(ev.tick);
        std::visit([this](auto &body) { handle(body); }, ev.body);
    }
}

void World::advance_to(Tick t)
{
    if (t <= now_)
        return;
    now_ = t;
    for (auto &[id, r] : routers_) {
        evictions_ += r.hrt().evict_idle(now_, scenario_.limits.idle_limit);
        evictions_ += r.drt().evict_idle(now_, scenario_.limits.idle_limit);
    }
}

TraceId World::open_trace(const NodeId &originator, Direction dir, bool adversarial)
{
    TraceId id = next_trace_++;
    traces_[id] = HopTrace{id, originator, dir, adversarial, {}, std::nullopt};
    return id;
}

void World::transmit(const NodeId &from, const NodeId &to, Datagram d)
{
    TraceEntry e{now_, from, to, d.src, d.dst, d.ttl, d.origin, d.trace_id};
    link_log_.push_back(e);
    traces_.at(d.trace_id).hops.push_back(e);
    schedule(now_ + 1, Arrival{to, from, is_host(from), std::move(d)});
}

void World::finish(const Datagram &d, const NodeId &node, Verdict v)
{
    VerdictRecord rec{d.trace_id, now_, node, std::move(v)};
    traces_.at(d.trace_id).terminal = rec;
    verdicts_.push_back(std::move(rec));
}

void World::handle(const Send &e)
{
    const auto &spec = scenario_.topology.hosts.at(e.host);
    const bool forward = std::any_of(global_prefixes_.begin(), global_prefixes_.end(),
                                     [&](const Prefix &p) { return p.contains(e.dst); });
    traces_[e.id] = HopTrace{e.id, e.host, forward ? Direction::forward : Direction::reverse, false, {}, std::nullopt};
    Datagram d{host_addresses_.at(e.host), e.dst, scenario_.limits.host_ttl, Address(0), e.payload, e.id};
    transmit(e.host, spec.router, std::move(d));
    ++injected_;
}

void World::handle(Arrival &e)
{
    if (auto h = scenario_.topology.hosts.find(e.at); h != scenario_.topology.hosts.end()) {
        const auto &spec = h->second;
        if (spec.role == HostRole::server && spec.echo && e.dgram.payload.rfind("re:", 0) != 0)
            host_send(e.at, e.dgram.src, "re:" + e.dgram.payload);
        return;
    }
    if (adversary_routers_.count(e.at)) {
        finish(e.dgram, e.at, Verdict::delivered());
        return;
    }

    Router &r = routers_.at(e.at);
    RouterContext ctx{scenario_.mode, now_, &rng_, &global_prefixes_, scenario_.limits.reverse_ttl};
    const Datagram arrived = e.dgram;
    StepResult res = r.receive(e.from, e.from_host, std::move(e.dgram), ctx);
    switch (res.verdict.action) {
    case Action::forwarded:
        ++forwarded_;
        transmit(r.id(), res.emit->to, std::move(res.emit->dgram));
        break;
    case Action::delivered:
        ++delivered_emissions_;
        transmit(r.id(), res.emit->to, res.emit->dgram);
        finish(res.emit->dgram, r.id(), res.verdict);
        break;
    case Action::dropped:
        finish(arrived, r.id(), res.verdict);
        break;
    }
}

FibSet World::collect_fibs() const
{
    FibSet fibs;
    for (const auto &[id, r] : routers_)
        fibs.emplace(id, r.fib());
    return fibs;
}

void World::handle(const Perturb &e)
{
    const auto &p = scenario_.perturbations[e.index];
    FibSet fibs = collect_fibs();
    if (const auto *c = std::get_if<CycleInjection>(&p.change)) {
        inject_fib_cycle(fibs, scenario_.topology, c->routers, c->prefix);
    } else {
        const auto &s = std::get<StaleDistance>(p.change);
        set_stale_distances(fibs, {{{s.router, s.prefix}, s.distance}});
    }
    for (auto &[id, fib] : fibs)
        routers_.at(id).fib() = std::move(fib);
}

Address World::forge(ForgePolicy policy, const LocalInterval &target)
{
    const auto &region = scenario_.region;
    switch (policy) {
    case ForgePolicy::in_interval:
        return Address(target.start.value + static_cast<std::uint32_t>(rng_.uniform(target.length)));
    case ForgePolicy::global: {
        const Prefix &p = global_prefixes_.front();
        const std::uint64_t size = p.last() - p.first() + 1;
        return Address(static_cast<std::uint32_t>(p.first() + rng_.uniform(size)));
    }
    case ForgePolicy::out_of_interval:
    case ForgePolicy::other_host:
        break;
    }
    // somewhere in the local region, outside the target interval
    const std::uint64_t room = std::uint64_t{region.length} - target.length;
    if (room == 0)
        return Address(static_cast<std::uint32_t>(target.end()));
    std::uint64_t k = region.start.value + rng_.uniform(room);
    if (k >= target.start.value)
        k += target.length;
    return Address(static_cast<std::uint32_t>(k));
}

void World::handle(const Inject &e)
{
    const auto &a = scenario_.adversaries[e.adversary];
    const Router &entry = routers_.at(a.attach);

    Address dst;
    if (a.dst) {
        dst = *a.dst;
    } else {
        bool found = false;
        for (const auto &[id, h] : scenario_.topology.hosts)
            if (h.role == HostRole::server && !found) {
                dst = *h.address;
                found = true;
            }
        if (!found)
            dst = global_prefixes_.front().base;
    }

    Datagram d;
    d.dst = dst;
    switch (a.kind) {
    case AdversaryKind::spoofing_host: {
        d.ttl = scenario_.limits.host_ttl;
        d.src = Address(0);
        bool forged = false;
        if (a.forge == ForgePolicy::other_host)
            for (const auto &[other, addr] : entry.hosts())
                if (other != a.id && !forged) {
                    d.src = addr;
                    forged = true;
                }
        if (!forged)
            d.src = forge(a.forge == ForgePolicy::other_host ? ForgePolicy::out_of_interval : a.forge, entry.own());
        break;
    }
    case AdversaryKind::spoofing_router:
        d.ttl = 255;
        d.src = forge(a.forge, entry.own());
        d.origin = forge(a.forge, entry.own());
        break;
    case AdversaryKind::replaying_router: {
        const auto &[from, to] = *a.replay_link;
        const TraceEntry *last = nullptr;
        for (const auto &h : link_log_)
            if (h.from == from && h.to == to && h.tick < now_)
                last = &h;
        if (!last)
            return;
        d.src = last->src;
        d.dst = last->dst;
        d.ttl = last->ttl;
        d.origin = last->origin;
        break;
    }
    }
    d.payload = "adv:" + a.id;
    d.trace_id = open_trace(a.id, Direction::forward, true);
    ++injected_;
    transmit(a.id, a.attach, std::move(d));
}

std::vector<TraceEntry> World::observe_link(const NodeId &from, const NodeId &to) const
{
    std::vector<TraceEntry> out;
    for (const auto &e : link_log_)
        if (e.from == from && e.to == to)
            out.push_back(e);
    return out;
}

const Router *World::router(const NodeId &id) const
{
    auto it = routers_.find(id);
    return it == routers_.end() ? nullptr : &it->second;
}

Router *World::router(const NodeId &id)
{
    auto it = routers_.find(id);
    return it == routers_.end() ? nullptr : &it->second;
}

std::optional<Address> World::host_address(const NodeId &host) const
{
    auto it = host_addresses_.find(host);
    if (it == host_addresses_.end())
        return std::nullopt;
    return it->second;
}

bool World::is_host(const NodeId &id) const { return host_addresses_.count(id) != 0; }

Metrics World::metrics() const
{
    Metrics m;
    for (Reason r : kAllReasons)
        if (r != Reason::ok)
            m.dropped_by_reason[r] = 0;
    for (const auto &[id, t] : traces_) {
        m.loop_hops += loop_hops(t);
        if (!t.terminal) {
            ++m.in_flight;
            continue;
        }
        if (t.terminal->verdict.action == Action::delivered) {
            ++m.delivered;
        } else {
            ++m.dropped;
            ++m.dropped_by_reason[t.terminal->verdict.reason];
        }
    }
    m.forwarded = forwarded_;
    m.handed_to_hosts = delivered_emissions_;
    m.injected = injected_;
    m.link_traversals = link_log_.size();
    m.evictions = evictions_;
    for (const auto &[id, r] : routers_) {
        m.hrt_collisions += r.hrt().collisions();
        m.drt_collisions += r.drt().collisions();
        m.hrt_high_water[id] = r.hrt_high_water();
        m.drt_high_water[id] = r.drt_high_water();
    }
    return m;
}

std::vector<std::string> check_invariants(const World &world)
{
    std::vector<std::string> out;
    const bool pear_mode = world.scenario().mode == Mode::tfr;
    auto is_router = [&](const NodeId &n) { return world.scenario().topology.routers.count(n) != 0; };

    for (const auto &[id, t] : world.traces()) {
        const std::string tag = "trace " + std::to_string(id) + ": ";
        for (std::size_t k = 1; k < t.hops.size(); ++k)
            if (t.hops[k - 1].to != t.hops[k].from)
                out.push_back(tag + "hops do not chain");
        if (t.terminal && t.terminal->verdict.reason == Reason::bad_provenance &&
            !t.terminal->verdict.offending_neighbor)
            out.push_back(tag + "bad_provenance without offending neighbor");
        if (!pear_mode || t.direction != Direction::forward)
            continue;

        // a datagram may come back to a router that then rejects it; it must
        // never be passed on by the same router twice
        auto fw = t.forwarders();
        std::set<NodeId> unique(fw.begin(), fw.end());
        if (unique.size() != fw.size())
            out.push_back(tag + "forward trace passes through a router twice");

        std::optional<std::uint32_t> last_ttl;
        for (const auto &h : t.hops) {
            if (!is_router(h.from) || !is_router(h.to))
                continue;
            if (last_ttl && h.ttl >= *last_ttl)
                out.push_back(tag + "ttl not strictly decreasing at " + h.from + "->" + h.to);
            last_ttl = h.ttl;
        }
    }

    if (pear_mode) {
        for (const auto &h : world.link_log()) {
            const Router *from = world.router(h.from);
            const Router *to = world.router(h.to);
            if (!from || !to)
                continue;
            const auto &t = world.traces().at(h.id);
            if (t.direction == Direction::forward) {
                if (!to->own().contains(h.src) || !to->own().contains(h.origin))
                    out.push_back("link " + h.from + "->" + h.to + ": forward header outside receiver interval");
            } else if (!from->own().contains(h.dst) || !from->own().contains(h.origin)) {
                out.push_back("link " + h.from + "->" + h.to + ": reverse header outside sender interval");
            }
        }
    }

    auto m = world.metrics();
    if (m.link_traversals != m.injected + m.forwarded + m.handed_to_hosts)
        out.push_back("link traversals do not match injections plus emissions");
    return out;
}

}  // namespace pear
