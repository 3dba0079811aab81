#pragma once

// Local-interval bookkeeping and the per-hop address swap.
//
// Every router announces a contiguous block of address scalars (its local
// interval). Hop-specific addresses carried between two routers are always
// taken from the receiver's interval; the sender translates between its own
// interval and the receiver's with a keyed modular shift.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pear {

class Rng;

using NodeId = std::string;

struct Address {
    std::uint32_t value = 0;

    constexpr Address() = default;
    constexpr explicit Address(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(Address, Address) = default;
};

std::string to_string(Address a);
std::string to_dotted(Address a);

// Accepts plain decimal ("167772161") or dotted quad ("10.0.0.1").
std::optional<Address> parse_address(const std::string &text);

struct Prefix {
    Address base;
    int length = 0;

    bool contains(Address a) const;
    std::uint32_t mask() const;
    std::uint64_t first() const { return base.value & mask(); }
    std::uint64_t last() const { return first() + (std::uint64_t{1} << (32 - length)) - 1; }

    friend auto operator<=>(const Prefix &, const Prefix &) = default;
};

std::string to_string(const Prefix &p);
// "<addr>/<len>"; the base is normalized by the mask.
std::optional<Prefix> parse_prefix(const std::string &text);

struct LocalInterval {
    Address start;
    std::uint32_t length = 0;

    constexpr bool contains(Address a) const
    {
        return a.value >= start.value &&
               std::uint64_t{a.value} < std::uint64_t{start.value} + length;
    }
    std::uint64_t end() const { return std::uint64_t{start.value} + length; }

    bool overlaps(const LocalInterval &other) const;
    bool overlaps(const Prefix &p) const;

    friend auto operator<=>(const LocalInterval &, const LocalInterval &) = default;
};

std::string to_string(const LocalInterval &iv);

// Per-router secret shift. Deliberately has no stream operator or to_string.
class SecretOffset {
public:
    constexpr SecretOffset() = default;
    constexpr explicit SecretOffset(std::uint32_t epsilon) : epsilon_(epsilon) {}

    constexpr std::uint32_t epsilon() const { return epsilon_; }

private:
    std::uint32_t epsilon_ = 0;
};

class AddressDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ExhaustedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool interval_contains(const LocalInterval &iv, Address a);

// y = neigh.start + ((eps + x - own.start) mod |LI|)
Address map_out(SecretOffset eps, const LocalInterval &own, const LocalInterval &neigh, Address x);

// Inverse of map_out for the same (eps, own, neigh).
Address map_in(SecretOffset eps, const LocalInterval &own, const LocalInterval &neigh, Address y);

struct ListTable {
    LocalInterval own;
    std::map<NodeId, LocalInterval> neighbors;
};

// Uniformly random member of `own` that is not in `occupied_sorted`
// (ascending, members of `own` only). Throws ExhaustedError when none is free.
Address pick_free_address(const LocalInterval &own, const std::vector<std::uint32_t> &occupied_sorted,
                          Rng &rng);

// Draws a uniformly random address of `own` not in `occupied` and records it
// there. Throws ExhaustedError when the interval is full.
Address assign_host_address(const ListTable &table, std::set<Address> &occupied, Rng &rng);

struct PlanViolation {
    char clause = 'a';  // a: equal lengths, b: local disjointness,
                        // c: disjoint from prefixes, d: LIST consistency
    NodeId router;
    std::string other;  // neighbor id or prefix text
    std::string message;
};

std::optional<PlanViolation> validate_interval_plan(const std::map<NodeId, ListTable> &tables,
                                                    const std::vector<Prefix> &prefixes);

}  // namespace pear
