#pragma once

#include <string>

#include "dspace/discovery.hpp"
#include "dspace/transfer.hpp"

namespace dspace {

// A validated space-definition document.
struct SpaceDocument {
    std::string space_id;
    ProbabilitySpace space;
    ActionSpace actions;
    ReusePolicy policy = ReusePolicy::reuse_only;
};

// Loads and validates a space-definition YAML document:
//   space: { name, dimensions: [ {name, kind, values: [...], weights?} ] }
//   actions: [ {name, actuator: {kind, settings?}, measures: [..], parameters?} ]
//   reuse_policy?: reuse-only | always-measure
// Violations raise SchemaError naming the offending field.
SpaceDocument load_space_yaml(const std::string& path);

// Loads and validates a transfer-job YAML document:
//   source_space, target_space, property,
//   mapping?: { <dimension>: { <source value>: <target value>, ... } },
//   selection?: clustering | top5 | linspace, direction?: min | max,
//   k_range?: [lo, hi], linspace_count?, operation_id?, ground_truth?
TransferJob load_transfer_yaml(const std::string& path);

}  // namespace dspace
