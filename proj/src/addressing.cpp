#include "pear/addressing.hpp"

#include <charconv>
#include <sstream>

#include "pear/rng.hpp"

namespace pear {

namespace {

std::optional<std::uint64_t> parse_u64(std::string_view text)
{
    if (text.empty())
        return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        return std::nullopt;
    return v;
}

}  // namespace

std::string to_string(Address a) { return std::to_string(a.value); }

std::string to_dotted(Address a)
{
    std::ostringstream os;
    os << ((a.value >> 24) & 0xff) << '.' << ((a.value >> 16) & 0xff) << '.'
       << ((a.value >> 8) & 0xff) << '.' << (a.value & 0xff);
    return os.str();
}

std::optional<Address> parse_address(const std::string &text)
{
    if (text.find('.') == std::string::npos) {
        auto v = parse_u64(text);
        if (!v || *v > 0xffffffffULL)
            return std::nullopt;
        return Address(static_cast<std::uint32_t>(*v));
    }
    std::uint32_t value = 0;
    int parts = 0;
    std::string_view rest(text);
    while (parts < 4) {
        auto dot = rest.find('.');
        auto octet = parse_u64(rest.substr(0, dot));
        if (!octet || *octet > 255)
            return std::nullopt;
        value = (value << 8) | static_cast<std::uint32_t>(*octet);
        ++parts;
        if (dot == std::string_view::npos)
            break;
        rest.remove_prefix(dot + 1);
    }
    if (parts != 4 || rest.find('.') != std::string_view::npos)
        return std::nullopt;
    return Address(value);
}

std::uint32_t Prefix::mask() const
{
    if (length <= 0)
        return 0;
    if (length >= 32)
        return 0xffffffffU;
    return ~((std::uint32_t{1} << (32 - length)) - 1);
}

bool Prefix::contains(Address a) const { return (a.value & mask()) == (base.value & mask()); }

std::string to_string(const Prefix &p) { return to_dotted(p.base) + "/" + std::to_string(p.length); }

std::optional<Prefix> parse_prefix(const std::string &text)
{
    auto slash = text.find('/');
    if (slash == std::string::npos)
        return std::nullopt;
    auto base = parse_address(text.substr(0, slash));
    auto len = parse_u64(std::string_view(text).substr(slash + 1));
    if (!base || !len || *len > 32)
        return std::nullopt;
    Prefix p{*base, static_cast<int>(*len)};
    p.base = Address(p.base.value & p.mask());
    return p;
}

bool LocalInterval::overlaps(const LocalInterval &other) const
{
    return std::uint64_t{start.value} < other.end() && std::uint64_t{other.start.value} < end();
}

bool LocalInterval::overlaps(const Prefix &p) const
{
    return std::uint64_t{start.value} <= p.last() && p.first() < end();
}

std::string to_string(const LocalInterval &iv)
{
    return "[" + std::to_string(iv.start.value) + "," + std::to_string(iv.end()) + ")";
}

bool interval_contains(const LocalInterval &iv, Address a) { return iv.contains(a); }

Address map_out(SecretOffset eps, const LocalInterval &own, const LocalInterval &neigh, Address x)
{
    if (!own.contains(x))
        throw AddressDomainError("map_out: " + to_string(x) + " outside " + to_string(own));
    if (own.length != neigh.length || own.length == 0)
        throw AddressDomainError("map_out: interval lengths differ");
    const std::uint64_t len = own.length;
    const std::uint64_t offset = (eps.epsilon() % len + (x.value - own.start.value)) % len;
    return Address(static_cast<std::uint32_t>(neigh.start.value + offset));
}

Address map_in(SecretOffset eps, const LocalInterval &own, const LocalInterval &neigh, Address y)
{
    if (!neigh.contains(y))
        throw AddressDomainError("map_in: " + to_string(y) + " outside " + to_string(neigh));
    if (own.length != neigh.length || own.length == 0)
        throw AddressDomainError("map_in: interval lengths differ");
    const std::uint64_t len = own.length;
    const std::uint64_t offset = ((y.value - neigh.start.value) + len - eps.epsilon() % len) % len;
    return Address(static_cast<std::uint32_t>(own.start.value + offset));
}

Address pick_free_address(const LocalInterval &own, const std::vector<std::uint32_t> &occupied_sorted,
                          Rng &rng)
{
    if (occupied_sorted.size() >= own.length)
        throw ExhaustedError("no free address in " + to_string(own));
    // k-th free offset in ascending order, skipping occupied members
    std::uint64_t k = rng.uniform(own.length - occupied_sorted.size());
    std::uint64_t candidate = own.start.value + k;
    for (std::uint32_t used : occupied_sorted) {
        if (used <= candidate)
            ++candidate;
        else
            break;
    }
    return Address(static_cast<std::uint32_t>(candidate));
}

Address assign_host_address(const ListTable &table, std::set<Address> &occupied, Rng &rng)
{
    std::vector<std::uint32_t> used;
    for (Address a : occupied)
        if (table.own.contains(a))
            used.push_back(a.value);
    Address picked = pick_free_address(table.own, used, rng);
    occupied.insert(picked);
    return picked;
}

std::optional<PlanViolation> validate_interval_plan(const std::map<NodeId, ListTable> &tables,
                                                    const std::vector<Prefix> &prefixes)
{
    std::optional<std::uint32_t> length;
    for (const auto &[id, t] : tables) {
        std::vector<std::pair<std::string, LocalInterval>> all{{id, t.own}};
        for (const auto &[n, iv] : t.neighbors)
            all.emplace_back(n, iv);
        for (const auto &[owner, iv] : all) {
            if (!length)
                length = iv.length;
            if (iv.length != *length || iv.length == 0)
                return PlanViolation{'a', id, owner,
                                     "interval " + to_string(iv) + " of " + owner +
                                         " does not have the common length " + std::to_string(*length)};
        }
    }
    for (const auto &[id, t] : tables) {
        std::vector<std::pair<std::string, LocalInterval>> all{{id, t.own}};
        for (const auto &[n, iv] : t.neighbors)
            all.emplace_back(n, iv);
        for (std::size_t a = 0; a < all.size(); ++a)
            for (std::size_t b = a + 1; b < all.size(); ++b)
                if (all[a].second.overlaps(all[b].second))
                    return PlanViolation{'b', all[a].first, all[b].first,
                                         "at router " + id + ": intervals of " + all[a].first + " " +
                                             to_string(all[a].second) + " and " + all[b].first + " " +
                                             to_string(all[b].second) + " overlap"};
    }
    for (const auto &[id, t] : tables)
        for (const auto &p : prefixes)
            if (t.own.overlaps(p))
                return PlanViolation{'c', id, to_string(p),
                                     "interval " + to_string(t.own) + " of " + id + " overlaps prefix " +
                                         to_string(p)};
    for (const auto &[id, t] : tables)
        for (const auto &[n, iv] : t.neighbors) {
            auto it = tables.find(n);
            if (it != tables.end() && it->second.own != iv)
                return PlanViolation{'d', id, n,
                                     "router " + id + " lists " + to_string(iv) + " for " + n + " but " + n +
                                         " announces " + to_string(it->second.own)};
        }
    return std::nullopt;
}

}  // namespace pear
