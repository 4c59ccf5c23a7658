#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "dspace/actuators.hpp"
#include "dspace/space.hpp"
#include "dspace/store.hpp"

namespace dspace {

enum class ReusePolicy { reuse_only, always_measure };

std::string to_string(ReusePolicy policy);
ReusePolicy reuse_policy_from_string(const std::string& text);

// One property value inside a Sample, with the experiment that produced it.
struct SampleProperty {
    double value = 0.0;
    std::string unit;
    std::string status = "ok";
    std::string experiment;
};

// A sampled point: the configuration, every property value produced by the
// space's succeeded experiments, failure markers for the rest, and how the
// point entered the record. Deliberately carries no wall-clock timestamps so
// deterministic operations serialize byte-identically.
struct Sample {
    Configuration configuration;
    std::string entity_id;
    std::map<std::string, SampleProperty> property_values;
    std::map<std::string, std::string> failures;  // experiment -> reason
    std::string origin;                           // measured | reused | predicted
    std::int64_t seq = 0;
    std::string operation_id;
};

// Runs every experiment of the action space against one configuration via the
// registry. Unknown actuator kind -> ConfigurationError.
std::vector<MeasurementResult> measure(const ActionSpace& actions, const Configuration& config,
                                       ActuatorRegistry& registry, SampleStore* store);

// A probability space and an action space bound to a shared store. sample()
// is the only way data enters the space: it reuses any stored results for the
// configuration and measures only what is missing. read() returns exactly
// what this space sampled, in order, regardless of what else the store holds.
class DiscoverySpace {
public:
    // Persists the definition under space_id; duplicate id -> error.
    static DiscoverySpace create(std::shared_ptr<SampleStore> store,
                                 std::shared_ptr<ActuatorRegistry> registry,
                                 const std::string& space_id, ProbabilitySpace space,
                                 ActionSpace actions,
                                 ReusePolicy policy = ReusePolicy::reuse_only);

    // Reopens a previously created space; unknown id -> ConfigurationError.
    static DiscoverySpace open(std::shared_ptr<SampleStore> store,
                               std::shared_ptr<ActuatorRegistry> registry,
                               const std::string& space_id);

    Sample sample(const Configuration& config, const std::string& operation_id);

    std::vector<Sample> read();

    const std::string& space_id() const { return space_id_; }
    const ProbabilitySpace& space() const { return space_; }
    const ActionSpace& actions() const { return actions_; }
    ReusePolicy reuse_policy() const { return policy_; }
    SampleStore& store() { return *store_; }
    std::shared_ptr<SampleStore> store_handle() { return store_; }
    std::shared_ptr<ActuatorRegistry> registry() { return registry_; }

    nlohmann::json definition_json() const;

    // Stores an externally computed result (a surrogate prediction) and logs
    // it in the sampling record with origin=predicted. Reconciles like
    // sample(): an already-stored result is not written twice.
    Sample add_predicted(const Configuration& config, const MeasurementResult& result,
                         const std::string& operation_id);

    // Sampling record as CSV: operation_id,seq,entity_id,origin,timestamp.
    std::string record_csv();

private:
    DiscoverySpace(std::shared_ptr<SampleStore> store, std::shared_ptr<ActuatorRegistry> registry,
                   std::string space_id, ProbabilitySpace space, ActionSpace actions,
                   ReusePolicy policy);

    Sample assemble(const RecordEntry& entry);

    std::shared_ptr<SampleStore> store_;
    std::shared_ptr<ActuatorRegistry> registry_;
    std::string space_id_;
    ProbabilitySpace space_;
    ActionSpace actions_;
    ReusePolicy policy_;
};

nlohmann::json space_definition_to_json(const std::string& space_id, const ProbabilitySpace& space,
                                        const ActionSpace& actions, ReusePolicy policy);
void space_definition_from_json(const nlohmann::json& j, ProbabilitySpace& space,
                                ActionSpace& actions, ReusePolicy& policy);

}  // namespace dspace
