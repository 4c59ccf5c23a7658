#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dspace/errors.hpp"

namespace dspace {

// A dimension value: a label for categorical dimensions, a number for
// discrete-numeric ones.
using Value = std::variant<std::string, double>;

// Canonical text form of a value. Integral numbers render without a decimal
// point, other numbers with up to 12 significant digits and trailing zeros
// stripped, so equal values always produce equal text.
std::string value_text(const Value& v);

bool value_equal(const Value& a, const Value& b);

// Strict ordering on canonical text, used wherever values must be sorted.
bool value_less(const Value& a, const Value& b);

enum class DimensionKind { categorical, discrete_numeric };

std::string to_string(DimensionKind kind);
DimensionKind dimension_kind_from_string(const std::string& text);

// One axis of a configuration space: a finite, ordered value list with an
// optional probability vector (uniform when omitted).
struct Dimension {
    std::string name;
    DimensionKind kind = DimensionKind::categorical;
    std::vector<Value> values;
    std::vector<double> weights;

    void validate() const;
    bool admits(const Value& v) const;
};

// The sampleable part of a discovery space: an ordered list of dimensions,
// each carrying its own distribution. Immutable after construction.
struct ProbabilitySpace {
    std::vector<Dimension> dimensions;

    void validate() const;
    const Dimension* find(const std::string& name) const;
};

// A single point: one value per dimension, keyed by dimension name.
struct Configuration {
    std::map<std::string, Value> assignments;

    bool operator==(const Configuration& other) const;
};

// One experiment in an action space: an actuator binding, the properties it
// measures, and optional fixed parameters.
struct Experiment {
    std::string name;
    std::string actuator_kind;
    nlohmann::json actuator_settings = nlohmann::json::object();
    std::vector<std::string> measured_properties;
    std::map<std::string, Value> parameters;

    void validate() const;
};

struct ActionSpace {
    std::vector<Experiment> experiments;

    void validate() const;
    const Experiment* find(const std::string& name) const;
};

// Per-dimension value bijections used to translate configurations between
// spaces; dimensions without an entry map identically.
struct ValueMapping {
    std::map<std::string, std::vector<std::pair<Value, Value>>> dimensions;

    void validate() const;
    ValueMapping inverse() const;
};

// Number of configurations in the space (empty space -> 1, the empty product).
std::uint64_t cardinality(const ProbabilitySpace& space);

// True when every dimension is assigned exactly once with an admissible value.
bool contains(const ProbabilitySpace& space, const Configuration& config);

// Every configuration exactly once, lexicographic in dimension declaration
// order and per-dimension value order.
std::vector<Configuration> enumerate(const ProbabilitySpace& space);

// Deterministic digest over the sorted (dimension, value) pairs; independent
// of assignment order and stable across processes.
std::string canonical_id(const Configuration& config);

// One weighted draw per dimension, independent across dimensions,
// deterministic for a given generator state.
Configuration draw(const ProbabilitySpace& space, std::mt19937_64& rng);

inline Configuration draw(const ProbabilitySpace& space, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return draw(space, rng);
}

// Image of a configuration under the mapping; dimensions the mapping does not
// cover pass through unchanged. A covered dimension whose value is absent from
// the mapping raises MappingError.
Configuration map_configuration(const Configuration& config, const ValueMapping& mapping);

}  // namespace dspace
