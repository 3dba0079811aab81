#include "pear/traceback.hpp"

namespace pear {

TracebackResult traceback(const World &world, const NodeId &egress, Address origin_id)
{
    TracebackResult out;
    const Router *current = world.router(egress);
    if (!current) {
        out.failure = "unknown_router";
        return out;
    }
    auto hip = current->drt().lookup(origin_id);
    if (!hip) {
        out.failure = "no_drt_state";
        return out;
    }

    Address origin = origin_id;
    const std::size_t limit = world.routers().size();
    for (;;) {
        out.path.push_back(current->id());
        auto entry = current->hrt().lookup(*hip);
        if (!entry) {
            out.failure = "no_hrt_state";
            return out;
        }
        const NodeId &prev = entry->next_hop;
        if (current->has_host(prev)) {
            out.status = TracebackResult::Status::found_host;
            out.host = prev;
            out.origin_consistent = current->host_address(prev) == origin;
            return out;
        }
        const Router *upstream = world.router(prev);
        if (!upstream) {
            out.status = TracebackResult::Status::untrusted;
            out.untrusted = prev;
            return out;
        }
        if (out.path.size() > limit) {
            out.failure = "cycle";
            return out;
        }
        try {
            // the upstream router wrote map = swap(its hip) and origin = swap(its origin)
            hip = upstream->invert_from(current->id(), entry->map);
            origin = upstream->invert_from(current->id(), origin);
        } catch (const AddressDomainError &) {
            out.path.push_back(prev);
            out.failure = "bad_mapping";
            return out;
        }
        current = upstream;
    }
}

std::string format_traceback(const TracebackResult &r)
{
    std::string out;
    for (const auto &n : r.path)
        out += (out.empty() ? "" : " ") + n;
    switch (r.status) {
    case TracebackResult::Status::found_host:
        out += " host=" + *r.host;
        break;
    case TracebackResult::Status::untrusted:
        out += " " + *r.untrusted + " untrusted";
        break;
    case TracebackResult::Status::failed:
        out += (out.empty() ? "" : " ") + std::string("failed=") + r.failure;
        break;
    }
    return out;
}

}  // namespace pear
