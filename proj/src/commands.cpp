#include "pear/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "pear/traceback.hpp"

namespace fs = std::filesystem;

namespace pear {

namespace {

constexpr const char *kSnapshotFile = "run.snap";

std::optional<std::uint64_t> parse_u64(const std::string &text)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        return std::nullopt;
    return v;
}

std::string addr(Address a, bool dotted) { return dotted ? to_dotted(a) : to_string(a); }

struct Snapshot {
    std::string scenario;
    Mode mode = Mode::tfr;
    std::uint64_t seed = 0;
    Tick until = 0;
};

void write_snapshot(const fs::path &dir, const Snapshot &s)
{
    std::ofstream os(dir / kSnapshotFile);
    os << "scenario=" << s.scenario << "\n"
       << "mode=" << to_string(s.mode) << "\n"
       << "seed=" << s.seed << "\n"
       << "until=" << s.until << "\n";
}

std::optional<Snapshot> read_snapshot(const fs::path &dir, std::ostream &err)
{
    std::ifstream in(dir / kSnapshotFile);
    if (!in) {
        err << "no completed run in " << dir.string() << "\n";
        return std::nullopt;
    }
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line))
        if (auto eq = line.find('='); eq != std::string::npos)
            kv[line.substr(0, eq)] = line.substr(eq + 1);
    Snapshot s;
    s.scenario = kv["scenario"];
    auto mode = parse_mode(kv["mode"]);
    auto seed = parse_u64(kv["seed"]);
    auto until = parse_u64(kv["until"]);
    if (s.scenario.empty() || !mode || !seed || !until) {
        err << "corrupt snapshot in " << dir.string() << "\n";
        return std::nullopt;
    }
    s.mode = *mode;
    s.seed = *seed;
    s.until = *until;
    return s;
}

void report(std::ostream &err, const LoadResult &r)
{
    for (const auto &e : r.errors)
        err << "error: " << to_string(e) << "\n";
}

// Rebuilds and reruns the world recorded by cmd_run.
std::optional<World> replay(const std::string &out_dir, std::ostream &err)
{
    auto snap = read_snapshot(out_dir, err);
    if (!snap)
        return std::nullopt;
    auto loaded = load_scenario(snap->scenario);
    if (!loaded.ok()) {
        report(err, loaded);
        return std::nullopt;
    }
    Scenario s = std::move(*loaded.scenario);
    s.mode = snap->mode;
    s.seed = snap->seed;
    s.limits.until = snap->until;
    try {
        World world(std::move(s));
        world.run();
        return world;
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << "\n";
        return std::nullopt;
    }
}

}  // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char *env, std::uint64_t scenario_seed)
{
    if (flag)
        return *flag;
    if (env)
        if (auto v = parse_u64(env))
            return *v;
    return scenario_seed;
}

void write_trace(std::ostream &os, const World &world, bool dotted)
{
    for (const auto &e : world.link_log())
        os << "t=" << e.tick << " link=" << e.from << "->" << e.to << " src=" << addr(e.src, dotted)
           << " dst=" << addr(e.dst, dotted) << " ttl=" << e.ttl << " oid=" << addr(e.origin, dotted)
           << " id=" << e.id << "\n";
}

void write_verdicts(std::ostream &os, const World &world)
{
    for (const auto &v : world.verdicts()) {
        os << "id=" << v.id << " t=" << v.tick << " node=" << v.node << " action=" << to_string(v.verdict.action)
           << " reason=" << to_string(v.verdict.reason);
        if (v.verdict.offending_neighbor)
            os << " offending=" << *v.verdict.offending_neighbor;
        os << "\n";
    }
}

void write_metrics(std::ostream &os, const World &world)
{
    const auto m = world.metrics();
    os << "mode=" << to_string(world.scenario().mode) << "\n"
       << "seed=" << world.scenario().seed << "\n"
       << "injected=" << m.injected << "\n"
       << "link_traversals=" << m.link_traversals << "\n"
       << "forwarded=" << m.forwarded << "\n"
       << "handed_to_hosts=" << m.handed_to_hosts << "\n"
       << "delivered=" << m.delivered << "\n"
       << "dropped=" << m.dropped << "\n"
       << "in_flight=" << m.in_flight << "\n";
    for (const auto &[reason, n] : m.dropped_by_reason)
        os << "drop." << to_string(reason) << "=" << n << "\n";
    os << "loop_hops=" << m.loop_hops << "\n"
       << "hrt_collisions=" << m.hrt_collisions << "\n"
       << "drt_collisions=" << m.drt_collisions << "\n"
       << "evictions=" << m.evictions << "\n";
    for (const auto &[id, n] : m.hrt_high_water)
        os << "hrt_hwm." << id << "=" << n << "\n";
    for (const auto &[id, n] : m.drt_high_water)
        os << "drt_hwm." << id << "=" << n << "\n";
}

void dump_tables(std::ostream &os, const Router &router, bool dotted)
{
    os << "# router " << router.id() << "\n";
    os << "# LIST\towner\tstart\tlength\n";
    os << "LIST\t" << router.id() << "\t" << addr(router.own().start, dotted) << "\t" << router.own().length
       << "\n";
    for (const auto &[n, iv] : router.list().neighbors)
        os << "LIST\t" << n << "\t" << addr(iv.start, dotted) << "\t" << iv.length << "\n";
    os << "# FIB\tprefix\tnext_hop\tdistance\n";
    for (const auto &e : router.fib().entries())
        os << "FIB\t" << addr(e.prefix.base, dotted) << "/" << e.prefix.length << "\t"
           << (e.next_hop ? *e.next_hop : std::string("local")) << "\t" << e.distance << "\n";
    os << "# HRT\thip\tnext_hop\tmap\tlast_used\n";
    for (const auto &e : router.hrt().entries())
        os << "HRT\t" << addr(e.hip, dotted) << "\t" << e.next_hop << "\t" << addr(e.map, dotted) << "\t"
           << e.last_used << "\n";
    os << "# DRT\torigin\thip\tlast_used\n";
    for (const auto &e : router.drt().entries())
        os << "DRT\t" << addr(e.origin, dotted) << "\t" << addr(e.hip, dotted) << "\t" << e.last_used << "\n";
}

int cmd_validate(const std::string &scenario_path, std::ostream &out, std::ostream &err)
{
    auto loaded = load_scenario(scenario_path);
    for (const auto &w : loaded.warnings)
        out << "warning: " << w << "\n";
    if (!loaded.ok()) {
        report(err, loaded);
        return kExitInvalid;
    }
    const auto &s = *loaded.scenario;
    out << "ok: " << s.topology.routers.size() << " routers, " << s.topology.links.size() << " links, "
        << s.topology.hosts.size() << " hosts\n";
    return kExitOk;
}

int cmd_run(const std::string &scenario_path, const std::string &out_dir, const RunOptions &opts, std::ostream &out,
            std::ostream &err)
{
    auto loaded = load_scenario(scenario_path);
    if (!loaded.ok()) {
        report(err, loaded);
        return kExitInvalid;
    }
    Scenario s = std::move(*loaded.scenario);
    if (opts.mode)
        s.mode = *opts.mode;
    s.seed = resolve_seed(opts.seed, std::getenv("PEAR_SEED"), s.seed);
    if (opts.until)
        s.limits.until = *opts.until;
    const Snapshot snap{fs::absolute(scenario_path).lexically_normal().string(), s.mode, s.seed, s.limits.until};

    std::optional<World> world;
    try {
        world.emplace(std::move(s));
        world->run();
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        err << "error: cannot create " << out_dir << ": " << ec.message() << "\n";
        return kExitInvalid;
    }
    const fs::path dir(out_dir);
    {
        std::ofstream os(dir / "trace.txt");
        write_trace(os, *world, opts.dotted);
    }
    {
        std::ofstream os(dir / "verdicts.txt");
        write_verdicts(os, *world);
    }
    {
        std::ofstream os(dir / "metrics.txt");
        write_metrics(os, *world);
    }
    write_snapshot(dir, snap);

    const auto m = world->metrics();
    out << "traces=" << world->traces().size() << " delivered=" << m.delivered << " dropped=" << m.dropped
        << " loop_hops=" << m.loop_hops << "\n";

    auto violations = check_invariants(*world);
    for (const auto &v : violations)
        err << "invariant: " << v << "\n";
    return violations.empty() ? kExitOk : kExitInvariant;
}

int cmd_traceback(const std::string &out_dir, const std::string &egress, const std::string &origin_id,
                  std::ostream &out, std::ostream &err)
{
    auto origin = parse_address(origin_id);
    if (!origin) {
        err << "error: bad origin id '" << origin_id << "'\n";
        return kExitInvalid;
    }
    auto world = replay(out_dir, err);
    if (!world)
        return kExitInvalid;
    if (!world->router(egress)) {
        err << "error: unknown router " << egress << "\n";
        return kExitInvalid;
    }
    auto result = traceback(*world, egress, *origin);
    out << format_traceback(result) << "\n";
    return result.status == TracebackResult::Status::failed ? kExitInvalid : kExitOk;
}

int cmd_dump_tables(const std::string &out_dir, const std::string &router, std::ostream &out, std::ostream &err)
{
    auto world = replay(out_dir, err);
    if (!world)
        return kExitInvalid;
    const Router *r = world->router(router);
    if (!r) {
        err << "error: unknown router " << router << "\n";
        return kExitInvalid;
    }
    dump_tables(out, *r);
    return kExitOk;
}

}  // namespace pear
