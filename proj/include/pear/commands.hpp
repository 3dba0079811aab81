#pragma once

// Subcommands behind the `pear` binary and the text artifacts they write.
// Formats are documented in docs/formats.md.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "pear/simnet.hpp"

namespace pear {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitInvariant = 2;

struct RunOptions {
    std::optional<Mode> mode;
    std::optional<std::uint64_t> seed;
    std::optional<Tick> until;
    bool dotted = false;
};

// Flag beats PEAR_SEED beats the scenario's own seed.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char *env, std::uint64_t scenario_seed);

void write_trace(std::ostream &os, const World &world, bool dotted = false);
void write_verdicts(std::ostream &os, const World &world);
void write_metrics(std::ostream &os, const World &world);
void dump_tables(std::ostream &os, const Router &router, bool dotted = false);

int cmd_run(const std::string &scenario_path, const std::string &out_dir, const RunOptions &opts, std::ostream &out,
            std::ostream &err);
int cmd_validate(const std::string &scenario_path, std::ostream &out, std::ostream &err);
int cmd_traceback(const std::string &out_dir, const std::string &egress, const std::string &origin_id,
                  std::ostream &out, std::ostream &err);
int cmd_dump_tables(const std::string &out_dir, const std::string &router, std::ostream &out, std::ostream &err);

}  // namespace pear
