#include "pear/tables.hpp"

#include <stdexcept>

#include "pear/rng.hpp"

namespace pear {

void Fib::upsert(FibEntry e)
{
    const auto key = e.prefix.base.value & e.prefix.mask();
    e.prefix.base = Address(key);
    by_length_[e.prefix.length].insert_or_assign(key, std::move(e));
}

FibEntry *Fib::find(const Prefix &p)
{
    auto len = by_length_.find(p.length);
    if (len == by_length_.end())
        return nullptr;
    auto it = len->second.find(p.base.value & p.mask());
    return it == len->second.end() ? nullptr : &it->second;
}

const FibEntry *Fib::find(const Prefix &p) const { return const_cast<Fib *>(this)->find(p); }

std::optional<FibEntry> Fib::lookup(Address d) const
{
    for (const auto &[length, entries] : by_length_) {
        if (entries.empty())
            continue;
        const auto mask = Prefix{Address(0), length}.mask();
        auto it = entries.find(d.value & mask);
        if (it != entries.end())
            return it->second;
    }
    return std::nullopt;
}

std::vector<FibEntry> Fib::entries() const
{
    std::map<Prefix, FibEntry> ordered;
    for (const auto &[length, entries] : by_length_)
        for (const auto &[base, e] : entries)
            ordered.emplace(e.prefix, e);
    std::vector<FibEntry> out;
    for (auto &[p, e] : ordered)
        out.push_back(e);
    return out;
}

std::size_t Fib::size() const
{
    std::size_t n = 0;
    for (const auto &[length, entries] : by_length_)
        n += entries.size();
    return n;
}

HrtAllocation Hrt::find_or_alloc(Address ship_in, const NodeId &prev, const LocalInterval &own, Rng &rng,
                                 Tick now)
{
    if (!own.contains(ship_in))
        throw AddressDomainError("hrt: incoming address " + to_string(ship_in) + " outside " + to_string(own));

    if (auto it = by_upstream_.find({prev, ship_in.value}); it != by_upstream_.end()) {
        auto &entry = by_hip_.at(it->second);
        entry.last_used = now;
        return {entry.hip, false};
    }

    Address hip = ship_in;
    if (by_hip_.count(ship_in.value)) {
        std::vector<std::uint32_t> used;
        used.reserve(by_hip_.size());
        for (const auto &[key, e] : by_hip_)
            used.push_back(key);
        hip = pick_free_address(own, used, rng);
        ++collisions_;
    }
    by_hip_.emplace(hip.value, HrtEntry{hip, prev, ship_in, now});
    by_upstream_.emplace(std::make_pair(prev, ship_in.value), hip.value);
    return {hip, true};
}

std::optional<HrtEntry> Hrt::lookup(Address hip) const
{
    auto it = by_hip_.find(hip.value);
    if (it == by_hip_.end())
        return std::nullopt;
    return it->second;
}

void Hrt::touch(Address hip, Tick now)
{
    if (auto it = by_hip_.find(hip.value); it != by_hip_.end())
        it->second.last_used = now;
}

std::size_t Hrt::evict_idle(Tick now, Tick idle_limit)
{
    if (idle_limit == 0)
        throw std::invalid_argument("evict_idle: idle_limit must be positive");
    std::size_t evicted = 0;
    for (auto it = by_hip_.begin(); it != by_hip_.end();) {
        const auto &e = it->second;
        if (now > e.last_used && now - e.last_used > idle_limit) {
            by_upstream_.erase({e.next_hop, e.map.value});
            it = by_hip_.erase(it);
            ++evicted;
        } else {
            ++it;
        }
    }
    return evicted;
}

std::vector<HrtEntry> Hrt::entries() const
{
    std::vector<HrtEntry> out;
    out.reserve(by_hip_.size());
    for (const auto &[key, e] : by_hip_)
        out.push_back(e);
    return out;
}

const char *to_string(DrtUpsert u)
{
    switch (u) {
    case DrtUpsert::inserted:
        return "inserted";
    case DrtUpsert::refreshed:
        return "refreshed";
    case DrtUpsert::overwritten:
        return "overwritten";
    }
    return "?";
}

DrtUpsert Drt::upsert(Address origin, Address hip, Tick now)
{
    auto [it, inserted] = by_origin_.try_emplace(origin.value, DrtEntry{origin, hip, now});
    if (inserted)
        return DrtUpsert::inserted;
    it->second.last_used = now;
    if (it->second.hip == hip)
        return DrtUpsert::refreshed;
    it->second.hip = hip;
    ++collisions_;
    return DrtUpsert::overwritten;
}

std::optional<Address> Drt::lookup(Address origin) const
{
    auto it = by_origin_.find(origin.value);
    if (it == by_origin_.end())
        return std::nullopt;
    return it->second.hip;
}

void Drt::touch(Address origin, Tick now)
{
    if (auto it = by_origin_.find(origin.value); it != by_origin_.end())
        it->second.last_used = now;
}

std::size_t Drt::evict_idle(Tick now, Tick idle_limit)
{
    if (idle_limit == 0)
        throw std::invalid_argument("evict_idle: idle_limit must be positive");
    return std::erase_if(by_origin_, [&](const auto &kv) {
        const auto &e = kv.second;
        return now > e.last_used && now - e.last_used > idle_limit;
    });
}

std::vector<DrtEntry> Drt::entries() const
{
    std::vector<DrtEntry> out;
    out.reserve(by_origin_.size());
    for (const auto &[key, e] : by_origin_)
        out.push_back(e);
    return out;
}

}  // namespace pear
