#pragma once

#include <stdexcept>
#include <string>

namespace topoplan {

enum class errc {
    duplicate_node,
    duplicate_edge,
    unknown_edge_endpoint,
    disconnected,
    negative_attribute,
    missing_node,
    district_disconnected,
    population_imbalance,
    zero_turnout_district,
    too_large,
    disconnected_subset,
    step_exhausted,
    no_valid_flip,
    missing_filtration,
    range_error,
    infinite_death,
    not_one_way,
    not_graph_preserving,
    mode_unavailable,
    anchor_not_party_won,
    invalid_config,
    io_error,
};

// Single exception type for the whole library; `code` identifies the failure
// and `index` the offending district or node where one exists.
struct error : std::runtime_error {
    errc code;
    long index;

    error(errc c, const std::string& msg, long idx = -1)
        : std::runtime_error(msg), code(c), index(idx) {}
};

} // namespace topoplan
