#pragma once

// Cooperative traceback: walks the reverse-path state from an egress DRT
// entry back toward the injecting node, inverting each hop's address swap.
// This is an out-of-band oracle with full access to compliant routers.

#include <optional>
#include <string>
#include <vector>

#include "pear/simnet.hpp"

namespace pear {

struct TracebackResult {
    enum class Status { found_host, untrusted, failed };

    Status status = Status::failed;
    std::vector<NodeId> path;        // compliant routers, egress first
    std::optional<NodeId> host;      // set when status == found_host
    std::optional<NodeId> untrusted; // first non-compliant node reached
    std::string failure;             // no_drt_state, no_hrt_state, ...
    bool origin_consistent = false;  // recovered origin equals the host's address
};

TracebackResult traceback(const World &world, const NodeId &egress, Address origin_id);

// "y n i p host=h", "y i adv untrusted", or "<path...> failed=<reason>".
std::string format_traceback(const TracebackResult &r);

}  // namespace pear
