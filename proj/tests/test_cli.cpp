#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "pear/commands.hpp"
#include "support.hpp"

using namespace pear;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string &name) { return std::string(PEAR_SOURCE_DIR) + "/scenarios/" + name; }

LoadResult parse(const std::string &text)
{
    std::istringstream in(text);
    return parse_scenario(in);
}

std::string temp_dir(const std::string &tag)
{
    auto dir = fs::temp_directory_path() / ("pear_test_" + tag);
    fs::remove_all(dir);
    return dir.string();
}

const char *kTiny = R"(
mode tfr
interval_length 100
router a start=0 eps=3
router b start=100 eps=5
link a b
prefix 10.0.0.0/8 router=b
host h router=a role=client
host s router=b role=server addr=10.0.0.1
send 1 h dst=10.0.0.1
)";

bool has_error(const LoadResult &r, int line, const std::string &clause)
{
    for (const auto &e : r.errors)
        if (e.line == line && e.clause == clause)
            return true;
    return false;
}

}  // namespace

TEST_CASE("scenario parse basics")
{
    auto r = parse(kTiny);
    REQUIRE(r.ok());
    CHECK(r.scenario->topology.routers.size() == 2);
    CHECK(r.scenario->traffic.size() == 1);
    CHECK(r.scenario->traffic[0].dst == *parse_address("10.0.0.1"));
    CHECK(r.scenario->mode == Mode::tfr);
}

TEST_CASE("scenario errors carry line and clause")
{
    auto empty = parse("# nothing\n\n");
    CHECK_FALSE(empty.ok());
    CHECK(has_error(empty, 0, "parse"));

    auto typo = parse(std::string(kTiny) + "rooter c start=200 eps=1\n");
    CHECK(has_error(typo, 11, "parse"));

    auto unknown_host = parse(std::string(kTiny) + "send 2 ghost dst=10.0.0.1\n");
    CHECK(has_error(unknown_host, 11, "reference"));

    auto bad_link = parse(std::string(kTiny) + "link a zz\n");
    CHECK(has_error(bad_link, 11, "topology"));

    auto bad_eps = parse(std::string(kTiny) + "router c start=200 eps=100\nlink b c\n");
    CHECK(has_error(bad_eps, 11, "region"));
}

TEST_CASE("overlapping neighbor intervals name both routers")
{
    auto r = parse(std::string(kTiny) + "router c start=150 eps=1\nlink b c\n");
    REQUIRE_FALSE(r.ok());
    bool named = false;
    for (const auto &e : r.errors)
        if (e.clause == "D1(b)" && e.message.find(" b ") != std::string::npos &&
            e.message.find(" c ") != std::string::npos && e.line > 0)
            named = true;
    CHECK(named);
}

TEST_CASE("plan check can be switched off")
{
    auto r = parse(std::string(kTiny) + "plan_check off\nrouter c start=150 eps=1\nlink b c\n");
    CHECK(r.ok());
}

TEST_CASE("shipped scenarios validate")
{
    for (const auto &entry : fs::directory_iterator(std::string(PEAR_SOURCE_DIR) + "/scenarios")) {
        std::ostringstream out, err;
        CHECK_MESSAGE(cmd_validate(entry.path().string(), out, err) == kExitOk, entry.path().string(), err.str());
    }
}

TEST_CASE("validate exit codes")
{
    std::ostringstream out, err;
    CHECK(cmd_validate(scenario_path("does-not-exist.scn"), out, err) == kExitInvalid);
}

TEST_CASE("seed precedence: flag, then environment, then scenario")
{
    CHECK(resolve_seed(5, "9", 1) == 5);
    CHECK(resolve_seed(std::nullopt, "9", 1) == 9);
    CHECK(resolve_seed(std::nullopt, nullptr, 1) == 1);
    CHECK(resolve_seed(std::nullopt, "nine", 1) == 1);
}

TEST_CASE("run writes artifacts and the seed override reaches metrics")
{
    auto dir = temp_dir("run");
    std::ostringstream out, err;
    RunOptions opts;
    opts.seed = 77;
    REQUIRE(cmd_run(scenario_path("fig1.scn"), dir, opts, out, err) == kExitOk);
    for (const char *f : {"trace.txt", "verdicts.txt", "metrics.txt", "run.snap"})
        CHECK(fs::exists(fs::path(dir) / f));
    CHECK(testing::read_file(dir + "/metrics.txt").find("seed=77\n") != std::string::npos);

    const std::regex line(R"(t=\d+ link=[^ ]+->[^ ]+ src=\d+ dst=\d+ ttl=\d+ oid=\d+ id=\d+)");
    std::istringstream trace(testing::read_file(dir + "/trace.txt"));
    std::string l;
    while (std::getline(trace, l))
        CHECK_MESSAGE(std::regex_match(l, line), l);
}

TEST_CASE("dotted output changes addresses only")
{
    auto dir = temp_dir("dotted");
    std::ostringstream out, err;
    RunOptions opts;
    opts.dotted = true;
    REQUIRE(cmd_run(scenario_path("fig1.scn"), dir, opts, out, err) == kExitOk);
    auto text = testing::read_file(dir + "/trace.txt");
    CHECK(text.find("dst=10.0.0.1 ") != std::string::npos);
    CHECK(text.find("src=0.0.15.163 ") != std::string::npos);  // 4003
}

TEST_CASE("run on an invalid scenario exits 1")
{
    auto dir = temp_dir("bad");
    auto file = fs::path(temp_dir("badscn"));
    fs::create_directories(file);
    file /= "bad.scn";
    {
        std::ofstream os(file);
        os << "router a start=0 eps=1\n";
    }
    std::ostringstream out, err;
    CHECK(cmd_run(file.string(), dir, {}, out, err) == kExitInvalid);
    CHECK_FALSE(err.str().empty());
}

TEST_CASE("traceback and dump-tables replay the run")
{
    auto dir = temp_dir("tb");
    std::ostringstream out, err;
    REQUIRE(cmd_run(scenario_path("fig1.scn"), dir, {}, out, err) == kExitOk);

    std::ostringstream tb, tberr;
    CHECK(cmd_traceback(dir, "y", "12345", tb, tberr) == kExitInvalid);
    CHECK(tb.str() == "failed=no_drt_state\n");

    std::ostringstream dump, derr;
    REQUIRE(cmd_dump_tables(dir, "i", dump, derr) == kExitOk);
    int hrt_lines = 0;
    std::istringstream in(dump.str());
    std::string l;
    while (std::getline(in, l))
        if (l.rfind("HRT\t", 0) == 0) {
            ++hrt_lines;
            CHECK(l.find("\t15\t") != std::string::npos);  // both entries map to 15
        }
    CHECK(hrt_lines == 2);

    std::ostringstream empty, eerr;
    REQUIRE(cmd_dump_tables(dir, "q", empty, eerr) == kExitOk);
    CHECK(empty.str().find("\nDRT\t") == std::string::npos);

    std::ostringstream none, nerr;
    CHECK(cmd_dump_tables(dir, "zz", none, nerr) == kExitInvalid);
    CHECK(cmd_dump_tables(temp_dir("never-ran"), "i", none, nerr) == kExitInvalid);
}

TEST_CASE("no artifact leaks a secret offset")
{
    const auto path = scenario_path("scrub.scn");
    auto loaded = load_scenario(path);
    REQUIRE(loaded.ok());
    std::vector<std::string> secrets;
    for (const auto &[id, spec] : loaded.scenario->topology.routers)
        secrets.push_back(std::to_string(spec.secret.epsilon()));

    auto dir = temp_dir("scrub");
    std::ostringstream out, err;
    REQUIRE(cmd_run(path, dir, {}, out, err) == kExitOk);
    std::string all = out.str() + err.str();
    for (const char *f : {"trace.txt", "verdicts.txt", "metrics.txt", "run.snap"})
        all += testing::read_file(dir + "/" + f);
    for (const auto &r : {"a", "b", "c"}) {
        std::ostringstream dump, derr;
        cmd_dump_tables(dir, r, dump, derr);
        all += dump.str();
    }
    World w(*loaded.scenario);
    w.run();
    auto flows = testing::delivered_flows(w);
    CHECK(flows.size() == 3);
    for (const auto &f : flows) {
        std::ostringstream tb, tberr;
        CHECK(cmd_traceback(dir, f.egress, to_string(f.origin), tb, tberr) == kExitOk);
        all += tb.str() + tberr.str();
    }

    const std::regex number(R"(\d+)");
    for (auto it = std::sregex_iterator(all.begin(), all.end(), number); it != std::sregex_iterator(); ++it)
        for (const auto &s : secrets)
            CHECK_MESSAGE(it->str() != s, "secret " << s << " found in output");
}
