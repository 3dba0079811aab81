#include <iostream>

#include "CLI11.hpp"
#include "pear/commands.hpp"

int main(int argc, char **argv)
{
    CLI::App app{"pear: forwarding-plane simulator"};
    app.require_subcommand(1);

    std::string scenario, out_dir = "out", mode_text, egress, origin, router;
    std::optional<std::uint64_t> seed;
    std::optional<pear::Tick> until;
    bool dotted = false;

    auto *run = app.add_subcommand("run", "run a scenario and write trace, verdicts and metrics");
    run->add_option("scenario", scenario)->required();
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--mode", mode_text)->check(CLI::IsMember({"tfr", "baseline"}));
    run->add_option("--seed", seed);
    run->add_option("--until", until);
    run->add_flag("--dotted", dotted, "print addresses as dotted quads");

    auto *validate = app.add_subcommand("validate", "check a scenario without running it");
    validate->add_option("scenario", scenario)->required();

    auto *tb = app.add_subcommand("traceback", "trace a delivered origin id back to its sender");
    tb->add_option("--out", out_dir, "directory of a previous run")->capture_default_str();
    tb->add_option("egress", egress)->required();
    tb->add_option("origin", origin)->required();

    auto *dump = app.add_subcommand("dump-tables", "print one router's tables after a run");
    dump->add_option("--out", out_dir, "directory of a previous run")->capture_default_str();
    dump->add_option("router", router)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : pear::kExitInvalid;
    }

    if (*run) {
        pear::RunOptions opts;
        if (!mode_text.empty())
            opts.mode = pear::parse_mode(mode_text);
        opts.seed = seed;
        opts.until = until;
        opts.dotted = dotted;
        return pear::cmd_run(scenario, out_dir, opts, std::cout, std::cerr);
    }
    if (*validate)
        return pear::cmd_validate(scenario, std::cout, std::cerr);
    if (*tb)
        return pear::cmd_traceback(out_dir, egress, origin, std::cout, std::cerr);
    return pear::cmd_dump_tables(out_dir, router, std::cout, std::cerr);
}
