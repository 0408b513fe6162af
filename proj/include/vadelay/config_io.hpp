#pragma once

#include <map>
#include <string>
#include <vector>

#include "vadelay/model.hpp"

namespace vadelay {

// Parse an intersection description from JSON text. Expected shape:
//
//   {
//     "flows": [
//       {"id": "main-street",
//        "arrival_rate_per_hour": 280,      // or "relative_load": 0.4
//        "saturation_rate_per_hour": 1800,
//        "headway_scv": 1.0,                 // optional, default 1
//        "interarrival_scv": 1.0},           // optional, default 1
//       ...
//     ],
//     "groups": [
//       {"flow_ids": ["main-street", ...],
//        "all_red_seconds": 2.0,             // optional, default 0
//        "all_red_scv": 0.0},                // optional, default 0
//       ...
//     ]
//   }
//
// All flows must use the same load style (absolute rates or relative loads).
// Throws ValidationError with a pointed message on any schema problem.
RawIntersection parse_intersection(const std::string& json_text);

// Resolve `name_or_path` against the bundled presets first, then the
// filesystem. Returns the parsed description.
RawIntersection load_intersection(const std::string& name_or_path);

// Names of the bundled presets, sorted.
std::vector<std::string> preset_names();

namespace detail {
const std::map<std::string, std::string>& preset_registry();
}

}  // namespace vadelay
