#include "pear/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

namespace pear {

namespace {

struct Line {
    int number = 0;
    std::string keyword;
    std::vector<std::string> positional;
    std::map<std::string, std::string> keys;
};

std::optional<std::uint64_t> parse_uint(const std::string &text)
{
    if (text.empty())
        return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        return std::nullopt;
    return v;
}

std::vector<std::string> split(const std::string &text, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    return out;
}

class Parser {
public:
    LoadResult run(std::istream &in)
    {
        std::string raw;
        int number = 0;
        bool any = false;
        while (std::getline(in, raw)) {
            ++number;
            if (auto hash = raw.find('#'); hash != std::string::npos)
                raw.erase(hash);
            std::istringstream is(raw);
            Line line{number, {}, {}, {}};
            if (!(is >> line.keyword))
                continue;
            any = true;
            std::string tok;
            while (is >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos)
                    line.positional.push_back(tok);
                else if (!line.keys.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second)
                    error(line, "parse", "duplicate key " + tok.substr(0, eq));
            }
            handle(line);
        }
        if (!any)
            errors_.push_back({0, "parse", "empty scenario"});
        if (!saw_length_ && any)
            errors_.push_back({0, "parse", "missing interval_length"});
        if (s_.topology.routers.empty() && any)
            errors_.push_back({0, "parse", "no routers declared"});

        LoadResult result;
        if (errors_.empty()) {
            s_.topology.interval_length = length_;
            auto more = validate_scenario(s_, lines_);
            errors_.insert(errors_.end(), more.begin(), more.end());
            result.warnings = validate_topology(s_.topology).warnings;
        }
        result.errors = std::move(errors_);
        if (result.errors.empty())
            result.scenario = std::move(s_);
        return result;
    }

private:
    void error(const Line &l, std::string clause, std::string message)
    {
        errors_.push_back({l.number, std::move(clause), std::move(message)});
    }

    bool positional(const Line &l, std::size_t n)
    {
        if (l.positional.size() != n) {
            error(l, "parse", l.keyword + " expects " + std::to_string(n) + " positional field(s)");
            return false;
        }
        return true;
    }

    std::optional<std::string> key(const Line &l, const std::string &k, bool required = true)
    {
        auto it = l.keys.find(k);
        if (it == l.keys.end()) {
            if (required)
                error(l, "parse", l.keyword + " is missing " + k + "=");
            return std::nullopt;
        }
        return it->second;
    }

    template <class T>
    std::optional<T> number(const Line &l, const std::string &text, const std::string &what)
    {
        auto v = parse_uint(text);
        if (!v || *v > std::numeric_limits<T>::max()) {
            error(l, "parse", "bad " + what + " '" + text + "'");
            return std::nullopt;
        }
        return static_cast<T>(*v);
    }

    std::optional<Address> address(const Line &l, const std::string &text)
    {
        auto a = parse_address(text);
        if (!a)
            error(l, "parse", "bad address '" + text + "'");
        return a;
    }

    std::optional<Prefix> prefix(const Line &l, const std::string &text)
    {
        auto p = parse_prefix(text);
        if (!p)
            error(l, "parse", "bad prefix '" + text + "'");
        return p;
    }

    void declare(const Line &l, const std::string &id)
    {
        if (!lines_.emplace(id, l.number).second)
            error(l, "reference", "duplicate id " + id);
    }

    void handle(const Line &l)
    {
        const auto &kw = l.keyword;
        if (kw == "mode") {
            if (!positional(l, 1))
                return;
            auto m = parse_mode(l.positional[0]);
            if (!m)
                return error(l, "parse", "mode must be tfr or baseline");
            s_.mode = *m;
        } else if (kw == "seed") {
            if (positional(l, 1))
                if (auto v = number<std::uint64_t>(l, l.positional[0], "seed"))
                    s_.seed = *v;
        } else if (kw == "region") {
            if (!positional(l, 2))
                return;
            auto start = address(l, l.positional[0]);
            auto len = number<std::uint32_t>(l, l.positional[1], "region length");
            if (start && len)
                s_.region = {*start, *len};
        } else if (kw == "interval_length") {
            if (positional(l, 1))
                if (auto v = number<std::uint32_t>(l, l.positional[0], "interval length")) {
                    if (*v == 0)
                        return error(l, "parse", "interval_length must be positive");
                    length_ = *v;
                    saw_length_ = true;
                }
        } else if (kw == "plan_check") {
            if (!positional(l, 1))
                return;
            if (l.positional[0] != "on" && l.positional[0] != "off")
                return error(l, "parse", "plan_check must be on or off");
            s_.check_plan = l.positional[0] == "on";
        } else if (kw == "router") {
            if (!positional(l, 1))
                return;
            auto start = key(l, "start");
            auto eps = key(l, "eps");
            if (!start || !eps)
                return;
            auto a = address(l, *start);
            auto e = number<std::uint32_t>(l, *eps, "eps");
            if (!a || !e)
                return;
            declare(l, l.positional[0]);
            s_.topology.routers[l.positional[0]] = RouterSpec{*a, SecretOffset(*e), true};
        } else if (kw == "link") {
            if (!positional(l, 2))
                return;
            if (l.positional[0] == l.positional[1])
                return error(l, "topology", "self link at " + l.positional[0]);
            s_.topology.add_link(l.positional[0], l.positional[1]);
            const auto &[a, b] = std::minmax(l.positional[0], l.positional[1]);
            lines_.emplace("@link:" + a + "-" + b, l.number);
        } else if (kw == "prefix") {
            if (!positional(l, 1))
                return;
            auto p = prefix(l, l.positional[0]);
            auto r = key(l, "router");
            if (p && r) {
                s_.topology.prefixes.push_back({*p, *r});
                lines_.emplace("@prefix:" + to_string(*p), l.number);
            }
        } else if (kw == "host") {
            handle_host(l);
        } else if (kw == "send") {
            if (!positional(l, 2))
                return;
            auto tick = number<Tick>(l, l.positional[0], "tick");
            auto dst_text = key(l, "dst");
            if (!tick || !dst_text)
                return;
            auto dst = address(l, *dst_text);
            if (!dst)
                return;
            lines_["@send:" + std::to_string(s_.traffic.size())] = l.number;
            s_.traffic.push_back({*tick, l.positional[1], *dst, l.keys.count("payload") ? l.keys.at("payload") : "p"});
        } else if (kw == "cycle") {
            if (!positional(l, 1))
                return;
            auto tick = number<Tick>(l, l.positional[0], "tick");
            auto ptext = key(l, "prefix");
            auto rtext = key(l, "routers");
            if (!tick || !ptext || !rtext)
                return;
            auto p = prefix(l, *ptext);
            if (!p)
                return;
            lines_["@perturb:" + std::to_string(s_.perturbations.size())] = l.number;
            s_.perturbations.push_back({*tick, CycleInjection{split(*rtext, ','), *p}});
        } else if (kw == "stale") {
            if (!positional(l, 1))
                return;
            auto tick = number<Tick>(l, l.positional[0], "tick");
            auto r = key(l, "router");
            auto ptext = key(l, "prefix");
            auto dtext = key(l, "distance");
            if (!tick || !r || !ptext || !dtext)
                return;
            auto p = prefix(l, *ptext);
            auto d = number<std::uint32_t>(l, *dtext, "distance");
            if (!p || !d)
                return;
            lines_["@perturb:" + std::to_string(s_.perturbations.size())] = l.number;
            s_.perturbations.push_back({*tick, StaleDistance{*r, *p, *d}});
        } else if (kw == "adversary") {
            handle_adversary(l);
        } else if (kw == "until") {
            if (positional(l, 1))
                if (auto v = number<Tick>(l, l.positional[0], "tick"))
                    s_.limits.until = *v;
        } else if (kw == "idle_limit") {
            if (positional(l, 1))
                if (auto v = number<Tick>(l, l.positional[0], "idle limit")) {
                    if (*v == 0)
                        return error(l, "parse", "idle_limit must be positive");
                    s_.limits.idle_limit = *v;
                }
        } else if (kw == "reverse_ttl" || kw == "host_ttl") {
            if (positional(l, 1))
                if (auto v = number<std::uint32_t>(l, l.positional[0], "ttl")) {
                    if (*v == 0 || *v > 255)
                        return error(l, "parse", kw + " must be in 1..255");
                    (kw == "reverse_ttl" ? s_.limits.reverse_ttl : s_.limits.host_ttl) = *v;
                }
        } else {
            error(l, "parse", "unknown keyword " + kw);
        }
    }

    void handle_host(const Line &l)
    {
        if (!positional(l, 1))
            return;
        auto router = key(l, "router");
        auto role = key(l, "role");
        if (!router || !role)
            return;
        HostSpec h;
        h.router = *router;
        if (*role == "client")
            h.role = HostRole::client;
        else if (*role == "server")
            h.role = HostRole::server;
        else
            return error(l, "parse", "role must be client or server");
        if (auto a = key(l, "addr", false)) {
            h.address = address(l, *a);
            if (!h.address)
                return;
        }
        if (auto e = key(l, "echo", false)) {
            if (*e != "on" && *e != "off")
                return error(l, "parse", "echo must be on or off");
            h.echo = *e == "on";
        }
        declare(l, l.positional[0]);
        s_.topology.hosts[l.positional[0]] = h;
    }

    void handle_adversary(const Line &l)
    {
        if (!positional(l, 1))
            return;
        AdversaryProfile a;
        a.id = l.positional[0];
        auto kind = key(l, "kind");
        auto attach = key(l, "attach");
        if (!kind || !attach)
            return;
        if (*kind == "spoofing-host")
            a.kind = AdversaryKind::spoofing_host;
        else if (*kind == "spoofing-router")
            a.kind = AdversaryKind::spoofing_router;
        else if (*kind == "replaying-router")
            a.kind = AdversaryKind::replaying_router;
        else
            return error(l, "parse", "unknown adversary kind " + *kind);
        a.attach = *attach;
        if (auto v = key(l, "start", a.kind != AdversaryKind::spoofing_host)) {
            a.interval_start = address(l, *v);
            if (!a.interval_start)
                return;
        } else if (a.kind != AdversaryKind::spoofing_host) {
            return;
        }
        if (auto v = key(l, "dst", false)) {
            a.dst = address(l, *v);
            if (!a.dst)
                return;
        }
        if (auto v = key(l, "forge", false)) {
            if (*v == "in")
                a.forge = ForgePolicy::in_interval;
            else if (*v == "out")
                a.forge = ForgePolicy::out_of_interval;
            else if (*v == "global")
                a.forge = ForgePolicy::global;
            else if (*v == "host")
                a.forge = ForgePolicy::other_host;
            else
                return error(l, "parse", "forge must be in, out, global or host");
        }
        if (auto v = key(l, "replay", a.kind == AdversaryKind::replaying_router)) {
            auto arrow = v->find("->");
            if (arrow == std::string::npos)
                return error(l, "parse", "replay must look like a->b");
            a.replay_link = {v->substr(0, arrow), v->substr(arrow + 2)};
        } else if (a.kind == AdversaryKind::replaying_router) {
            return;
        }
        for (auto [name, field] : {std::pair{"count", &a.count}}) {
            if (auto v = key(l, name, false)) {
                auto n = number<std::uint32_t>(l, *v, name);
                if (!n)
                    return;
                *field = *n;
            }
        }
        for (auto [name, field] : {std::pair{"at", &a.start}, std::pair{"every", &a.period}}) {
            if (auto v = key(l, name, false)) {
                auto n = number<Tick>(l, *v, name);
                if (!n)
                    return;
                *field = *n;
            }
        }
        if (a.period == 0)
            return error(l, "parse", "every must be positive");
        declare(l, a.id);

        if (a.kind == AdversaryKind::spoofing_host) {
            s_.topology.hosts[a.id] = HostSpec{a.attach, HostRole::client, std::nullopt, false};
        } else {
            s_.topology.routers[a.id] = RouterSpec{*a.interval_start, SecretOffset(0), false};
            s_.topology.links.insert(a.id < a.attach ? std::make_pair(a.id, a.attach)
                                                     : std::make_pair(a.attach, a.id));
        }
        s_.adversaries.push_back(std::move(a));
    }

    Scenario s_;
    std::uint32_t length_ = 0;
    bool saw_length_ = false;
    std::map<std::string, int> lines_;
    std::vector<ScenarioError> errors_;
};

int line_of(const std::map<std::string, int> &lines, const std::string &id)
{
    auto it = lines.find(id);
    return it == lines.end() ? 0 : it->second;
}

}  // namespace

const char *to_string(AdversaryKind k)
{
    switch (k) {
    case AdversaryKind::spoofing_host:
        return "spoofing-host";
    case AdversaryKind::spoofing_router:
        return "spoofing-router";
    case AdversaryKind::replaying_router:
        return "replaying-router";
    }
    return "?";
}

const char *to_string(ForgePolicy p)
{
    switch (p) {
    case ForgePolicy::in_interval:
        return "in";
    case ForgePolicy::out_of_interval:
        return "out";
    case ForgePolicy::global:
        return "global";
    case ForgePolicy::other_host:
        return "host";
    }
    return "?";
}

std::string to_string(const ScenarioError &e)
{
    std::string out = e.line > 0 ? "line " + std::to_string(e.line) + ": " : "";
    return out + "[" + e.clause + "] " + e.message;
}

std::vector<ScenarioError> validate_scenario(const Scenario &s, const std::map<std::string, int> &lines)
{
    std::vector<ScenarioError> errors;
    const auto &topo = s.topology;

    for (const auto &e : validate_topology(topo).errors)
        errors.push_back({line_of(lines, e.subject), "topology", e.message});

    for (const auto &[id, spec] : topo.routers) {
        LocalInterval iv{spec.interval_start, topo.interval_length};
        if (!(iv.start >= s.region.start && iv.end() <= s.region.end()))
            errors.push_back({line_of(lines, id), "region",
                              "interval " + to_string(iv) + " of " + id + " is outside the local region " +
                                  to_string(s.region)});
        if (spec.compliant && spec.secret.epsilon() >= topo.interval_length)
            errors.push_back({line_of(lines, id), "region", "eps of " + id + " must be below interval_length"});
    }
    for (const auto &pa : topo.prefixes)
        if (s.region.overlaps(pa.prefix))
            errors.push_back({line_of(lines, "@prefix:" + to_string(pa.prefix)), "region",
                              "prefix " + to_string(pa.prefix) + " overlaps the local region"});

    if (s.check_plan) {
        if (auto v = validate_interval_plan(topo.list_tables(), topo.global_prefixes())) {
            std::string clause = std::string("D1(") + v->clause + ")";
            errors.push_back({std::max(line_of(lines, v->router), line_of(lines, v->other)), clause, v->message});
        }
    }

    for (std::size_t i = 0; i < s.traffic.size(); ++i)
        if (!topo.hosts.count(s.traffic[i].host))
            errors.push_back({line_of(lines, "@send:" + std::to_string(i)), "reference",
                              "send references unknown host " + s.traffic[i].host});

    auto known_prefix = [&](const Prefix &p) { return topo.attachment_of(p).has_value(); };
    for (std::size_t i = 0; i < s.perturbations.size(); ++i) {
        const auto &p = s.perturbations[i];
        const int at = line_of(lines, "@perturb:" + std::to_string(i));
        if (const auto *c = std::get_if<CycleInjection>(&p.change)) {
            if (!known_prefix(c->prefix))
                errors.push_back({at, "reference", "cycle references unknown prefix " + to_string(c->prefix)});
            if (c->routers.size() < 2)
                errors.push_back({at, "reference", "cycle needs at least two routers"});
            for (std::size_t k = 0; k < c->routers.size(); ++k) {
                const auto &a = c->routers[k];
                const auto &b = c->routers[(k + 1) % c->routers.size()];
                if (!topo.compliant(a))
                    errors.push_back({at, "reference", "cycle references unknown router " + a});
                else if (c->routers.size() >= 2 && !topo.adjacent(a, b))
                    errors.push_back({at, "topology", "cycle members " + a + " and " + b + " are not adjacent"});
            }
        } else {
            const auto &st = std::get<StaleDistance>(p.change);
            if (!topo.compliant(st.router))
                errors.push_back({at, "reference", "stale references unknown router " + st.router});
            if (!known_prefix(st.prefix))
                errors.push_back({at, "reference", "stale references unknown prefix " + to_string(st.prefix)});
        }
    }

    for (const auto &a : s.adversaries) {
        if (topo.prefixes.empty())
            errors.push_back({line_of(lines, a.id), "reference", "adversary " + a.id + " needs a global prefix to target"});
        if (!topo.compliant(a.attach))
            errors.push_back({line_of(lines, a.id), "reference",
                              "adversary " + a.id + " attaches to unknown router " + a.attach});
        if (a.replay_link && !topo.adjacent(a.replay_link->first, a.replay_link->second) &&
            !(topo.hosts.count(a.replay_link->first) || topo.hosts.count(a.replay_link->second)))
            errors.push_back({line_of(lines, a.id), "reference",
                              "adversary " + a.id + " replays unknown link " + a.replay_link->first + "->" +
                                  a.replay_link->second});
    }
    return errors;
}

LoadResult parse_scenario(std::istream &in) { return Parser{}.run(in); }

LoadResult load_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        LoadResult r;
        r.errors.push_back({0, "io", "cannot read " + path});
        return r;
    }
    return parse_scenario(in);
}

}  // namespace pear
