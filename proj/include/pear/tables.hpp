#pragma once

// Per-router forwarding state: the FIB (global prefixes with min-hop
// distances), the HRT (hop-specific reverse-path entries) and the DRT
// (egress entries keyed by origin ID).

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pear/addressing.hpp"

namespace pear {

using Tick = std::uint64_t;

inline constexpr Tick kDefaultIdleLimit = 10'000;

struct FibEntry {
    Prefix prefix;
    std::optional<NodeId> next_hop;  // empty: prefix attached to this router
    std::uint32_t distance = 0;

    bool attached() const { return !next_hop.has_value(); }
};

// Single-path FIB with longest-prefix-match lookup.
class Fib {
public:
    // Inserts or replaces the entry for e.prefix.
    void upsert(FibEntry e);
    FibEntry *find(const Prefix &p);
    const FibEntry *find(const Prefix &p) const;
    std::optional<FibEntry> lookup(Address d) const;

    std::vector<FibEntry> entries() const;  // ordered by prefix
    std::size_t size() const;
    bool empty() const { return size() == 0; }

private:
    // length -> masked base -> entry; scanned from the longest length down
    std::map<int, std::map<std::uint32_t, FibEntry>, std::greater<>> by_length_;
};

struct HrtEntry {
    Address hip;
    NodeId next_hop;
    Address map;
    Tick last_used = 0;
};

struct HrtAllocation {
    Address hip;
    bool fresh = false;

    friend bool operator==(const HrtAllocation &, const HrtAllocation &) = default;
};

// Hop-specific routing table. Keyed by hip, with (next_hop, map) unique as
// a secondary key so each upstream flow owns exactly one entry.
class Hrt {
public:
    // Reuses the entry for (prev, ship_in) if present; otherwise indexes the
    // new entry by ship_in, or by a random free address of `own` when ship_in
    // is taken. Throws ExhaustedError if every index is in use.
    HrtAllocation find_or_alloc(Address ship_in, const NodeId &prev, const LocalInterval &own, Rng &rng,
                                Tick now);

    std::optional<HrtEntry> lookup(Address hip) const;
    void touch(Address hip, Tick now);

    std::size_t evict_idle(Tick now, Tick idle_limit);

    std::size_t size() const { return by_hip_.size(); }
    std::uint64_t collisions() const { return collisions_; }
    std::vector<HrtEntry> entries() const;  // ordered by hip

private:
    std::map<std::uint32_t, HrtEntry> by_hip_;
    std::map<std::pair<NodeId, std::uint32_t>, std::uint32_t> by_upstream_;
    std::uint64_t collisions_ = 0;
};

struct DrtEntry {
    Address origin;
    Address hip;
    Tick last_used = 0;
};

enum class DrtUpsert { inserted, refreshed, overwritten };

const char *to_string(DrtUpsert u);

// Destination routing table at an egress router, keyed by origin ID.
// A second hip for a known origin overwrites (last writer wins) and counts.
class Drt {
public:
    DrtUpsert upsert(Address origin, Address hip, Tick now);
    std::optional<Address> lookup(Address origin) const;
    void touch(Address origin, Tick now);

    std::size_t evict_idle(Tick now, Tick idle_limit);

    std::size_t size() const { return by_origin_.size(); }
    std::uint64_t collisions() const { return collisions_; }
    std::vector<DrtEntry> entries() const;  // ordered by origin

private:
    std::map<std::uint32_t, DrtEntry> by_origin_;
    std::uint64_t collisions_ = 0;
};

}  // namespace pear
