#pragma once

// Scenario description and its line-oriented text format (docs/formats.md).

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pear/control.hpp"
#include "pear/datapath.hpp"

namespace pear {

struct TrafficEvent {
    Tick tick = 0;
    NodeId host;
    Address dst;
    std::string payload;
};

struct CycleInjection {
    std::vector<NodeId> routers;
    Prefix prefix;
};

struct StaleDistance {
    NodeId router;
    Prefix prefix;
    std::uint32_t distance = 0;
};

struct Perturbation {
    Tick tick = 0;
    std::variant<CycleInjection, StaleDistance> change;
};

enum class AdversaryKind { spoofing_host, spoofing_router, replaying_router };

// How an adversary fills src/origin of what it injects.
enum class ForgePolicy {
    in_interval,      // inside the receiving router's interval (locally valid)
    out_of_interval,  // local-scope but outside the receiving router's interval
    global,           // a global-scope address
    other_host,       // another host's assigned address (spoofing hosts)
};

const char *to_string(AdversaryKind k);
const char *to_string(ForgePolicy p);

struct AdversaryProfile {
    NodeId id;
    AdversaryKind kind = AdversaryKind::spoofing_host;
    NodeId attach;  // the compliant router it connects to
    std::optional<Address> interval_start;  // announced interval (router kinds)
    std::optional<Address> dst;             // target; defaults to the first server
    ForgePolicy forge = ForgePolicy::out_of_interval;
    std::optional<std::pair<NodeId, NodeId>> replay_link;
    std::uint32_t count = 1;
    Tick start = 1;
    Tick period = 1;
};

struct Limits {
    Tick until = 1000;
    Tick idle_limit = kDefaultIdleLimit;
    std::uint32_t reverse_ttl = kReverseInitialTtl;
    std::uint32_t host_ttl = kHostDefaultTtl;
};

struct Scenario {
    Mode mode = Mode::tfr;
    std::uint64_t seed = 1;
    LocalInterval region{Address(0), 1U << 24};  // all local intervals live here
    bool check_plan = true;
    Topology topology;
    std::vector<TrafficEvent> traffic;
    std::vector<Perturbation> perturbations;
    std::vector<AdversaryProfile> adversaries;
    Limits limits;
};

struct ScenarioError {
    int line = 0;  // 0 when not tied to one line
    std::string clause;
    std::string message;
};

std::string to_string(const ScenarioError &e);

struct LoadResult {
    std::optional<Scenario> scenario;
    std::vector<ScenarioError> errors;
    std::vector<std::string> warnings;

    bool ok() const { return scenario.has_value(); }
};

LoadResult parse_scenario(std::istream &in);
LoadResult load_scenario(const std::string &path);

// Static checks shared by the parser and programmatic construction.
// `lines` maps declaration ids to their source lines when known.
std::vector<ScenarioError> validate_scenario(const Scenario &s, const std::map<std::string, int> &lines = {});

}  // namespace pear
