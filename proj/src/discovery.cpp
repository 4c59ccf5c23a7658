#include "dspace/discovery.hpp"

#include <sstream>

#include "dspace/json_util.hpp"

namespace dspace {

std::string to_string(ReusePolicy policy) {
    return policy == ReusePolicy::reuse_only ? "reuse-only" : "always-measure";
}

ReusePolicy reuse_policy_from_string(const std::string& text) {
    if (text == "reuse-only") return ReusePolicy::reuse_only;
    if (text == "always-measure") return ReusePolicy::always_measure;
    throw ConfigurationError("unknown reuse policy '" + text + "'");
}

std::vector<MeasurementResult> measure(const ActionSpace& actions, const Configuration& config,
                                       ActuatorRegistry& registry, SampleStore* store) {
    std::vector<MeasurementResult> results;
    for (const auto& experiment : actions.experiments) {
        auto actuator = registry.resolve(experiment.actuator_kind, experiment.actuator_settings, store);
        results.push_back(actuator->measure(experiment, config));
    }
    return results;
}

nlohmann::json space_definition_to_json(const std::string& space_id, const ProbabilitySpace& space,
                                        const ActionSpace& actions, ReusePolicy policy) {
    nlohmann::json j;
    j["schema_version"] = "dspace-space/1";
    j["space_id"] = space_id;
    j["reuse_policy"] = to_string(policy);
    nlohmann::json dims = nlohmann::json::array();
    for (const auto& dim : space.dimensions) {
        nlohmann::json d;
        d["name"] = dim.name;
        d["kind"] = to_string(dim.kind);
        nlohmann::json values = nlohmann::json::array();
        for (const auto& v : dim.values) values.push_back(value_to_json(v));
        d["values"] = values;
        if (!dim.weights.empty()) d["weights"] = dim.weights;
        dims.push_back(std::move(d));
    }
    j["space"] = nlohmann::json{{"dimensions", dims}};
    nlohmann::json exps = nlohmann::json::array();
    for (const auto& exp : actions.experiments) {
        nlohmann::json e;
        e["name"] = exp.name;
        e["actuator"] = nlohmann::json{{"kind", exp.actuator_kind}, {"settings", exp.actuator_settings}};
        e["measures"] = exp.measured_properties;
        if (!exp.parameters.empty()) e["parameters"] = assignments_to_json(exp.parameters);
        exps.push_back(std::move(e));
    }
    j["actions"] = exps;
    return j;
}

void space_definition_from_json(const nlohmann::json& j, ProbabilitySpace& space,
                                ActionSpace& actions, ReusePolicy& policy) {
    policy = reuse_policy_from_string(j.value("reuse_policy", "reuse-only"));
    space.dimensions.clear();
    for (const auto& d : j.at("space").at("dimensions")) {
        Dimension dim;
        dim.name = d.at("name").get<std::string>();
        dim.kind = dimension_kind_from_string(d.at("kind").get<std::string>());
        for (const auto& v : d.at("values")) dim.values.push_back(value_from_json(v));
        if (d.contains("weights")) dim.weights = d.at("weights").get<std::vector<double>>();
        space.dimensions.push_back(std::move(dim));
    }
    actions.experiments.clear();
    for (const auto& e : j.at("actions")) {
        Experiment exp;
        exp.name = e.at("name").get<std::string>();
        exp.actuator_kind = e.at("actuator").at("kind").get<std::string>();
        exp.actuator_settings = e.at("actuator").value("settings", nlohmann::json::object());
        exp.measured_properties = e.at("measures").get<std::vector<std::string>>();
        if (e.contains("parameters")) exp.parameters = assignments_from_json(e.at("parameters"));
        actions.experiments.push_back(std::move(exp));
    }
    space.validate();
    actions.validate();
}

DiscoverySpace::DiscoverySpace(std::shared_ptr<SampleStore> store,
                               std::shared_ptr<ActuatorRegistry> registry, std::string space_id,
                               ProbabilitySpace space, ActionSpace actions, ReusePolicy policy)
    : store_(std::move(store)),
      registry_(std::move(registry)),
      space_id_(std::move(space_id)),
      space_(std::move(space)),
      actions_(std::move(actions)),
      policy_(policy) {}

DiscoverySpace DiscoverySpace::create(std::shared_ptr<SampleStore> store,
                                      std::shared_ptr<ActuatorRegistry> registry,
                                      const std::string& space_id, ProbabilitySpace space,
                                      ActionSpace actions, ReusePolicy policy) {
    if (space_id.empty()) throw ConfigurationError("space_id must not be empty");
    space.validate();
    actions.validate();
    store->put_space_definition(space_id,
                                space_definition_to_json(space_id, space, actions, policy));
    return DiscoverySpace(std::move(store), std::move(registry), space_id, std::move(space),
                          std::move(actions), policy);
}

DiscoverySpace DiscoverySpace::open(std::shared_ptr<SampleStore> store,
                                    std::shared_ptr<ActuatorRegistry> registry,
                                    const std::string& space_id) {
    auto definition = store->get_space_definition(space_id);
    if (!definition)
        throw ConfigurationError("space '" + space_id + "' does not exist in this store");
    ProbabilitySpace space;
    ActionSpace actions;
    ReusePolicy policy = ReusePolicy::reuse_only;
    space_definition_from_json(*definition, space, actions, policy);
    return DiscoverySpace(std::move(store), std::move(registry), space_id, std::move(space),
                          std::move(actions), policy);
}

nlohmann::json DiscoverySpace::definition_json() const {
    return space_definition_to_json(space_id_, space_, actions_, policy_);
}

Sample DiscoverySpace::sample(const Configuration& config, const std::string& operation_id) {
    if (!contains(space_, config))
        throw EncapsulationError("configuration is outside the space '" + space_id_ + "'");

    std::string entity_id = canonical_id(config);
    auto entity = store_->get_by_id(entity_id);

    std::vector<const Experiment*> missing;
    for (const auto& experiment : actions_.experiments) {
        bool present = false;
        if (policy_ == ReusePolicy::reuse_only && entity) {
            for (const auto& result : entity->results) {
                if (result.experiment_name == experiment.name &&
                    assignments_to_json(result.experiment_parameters) ==
                        assignments_to_json(experiment.parameters)) {
                    present = true;
                    break;
                }
            }
        }
        if (!present) missing.push_back(&experiment);
    }

    std::string origin = missing.empty() ? "reused" : "measured";
    for (const Experiment* experiment : missing) {
        auto actuator =
            registry_->resolve(experiment->actuator_kind, experiment->actuator_settings, store_.get());
        MeasurementResult result = actuator->measure(*experiment, config);
        store_->put_result(config, result);
    }

    RecordEntry entry;
    entry.operation_id = operation_id;
    entry.seq = store_->next_seq(space_id_, operation_id);
    entry.entity_id = entity_id;
    entry.origin = origin;
    entry.timestamp = utc_now_ns();
    store_->append_record(space_id_, entry);
    return assemble(entry);
}

Sample DiscoverySpace::add_predicted(const Configuration& config, const MeasurementResult& result,
                                     const std::string& operation_id) {
    if (!contains(space_, config))
        throw EncapsulationError("configuration is outside the space '" + space_id_ + "'");
    if (actions_.find(result.experiment_name) == nullptr)
        throw ConfigurationError("experiment '" + result.experiment_name +
                                 "' is not in the action space of '" + space_id_ + "'");
    // Reconcile like sample(): a prediction already in the store is reused,
    // not written again.
    bool already_stored = false;
    if (auto entity = store_->get_by_id(canonical_id(config))) {
        for (const auto& stored : entity->results)
            if (stored.experiment_name == result.experiment_name &&
                assignments_to_json(stored.experiment_parameters) ==
                    assignments_to_json(result.experiment_parameters))
                already_stored = true;
    }
    if (!already_stored) store_->put_result(config, result);
    RecordEntry entry;
    entry.operation_id = operation_id;
    entry.seq = store_->next_seq(space_id_, operation_id);
    entry.entity_id = canonical_id(config);
    entry.origin = "predicted";
    entry.timestamp = utc_now_ns();
    store_->append_record(space_id_, entry);
    return assemble(entry);
}

Sample DiscoverySpace::assemble(const RecordEntry& entry) {
    auto entity = store_->get_by_id(entry.entity_id);
    if (!entity)
        throw IntegrityError("sampling record of '" + space_id_ + "' references missing entity '" +
                             entry.entity_id + "'");
    Sample sample;
    sample.configuration = entity->assignments;
    sample.entity_id = entry.entity_id;
    sample.origin = entry.origin;
    sample.seq = entry.seq;
    sample.operation_id = entry.operation_id;
    for (const auto& experiment : actions_.experiments) {
        const MeasurementResult* found = nullptr;
        for (const auto& result : entity->results) {
            if (result.experiment_name == experiment.name &&
                assignments_to_json(result.experiment_parameters) ==
                    assignments_to_json(experiment.parameters)) {
                found = &result;
                break;
            }
        }
        if (found == nullptr) continue;
        if (found->status == "ok") {
            for (const auto& prop : experiment.measured_properties) {
                auto it = found->property_values.find(prop);
                if (it == found->property_values.end()) continue;
                SampleProperty sp;
                sp.value = it->second.value;
                sp.unit = it->second.unit;
                sp.status = it->second.status;
                sp.experiment = experiment.name;
                sample.property_values[prop] = sp;
            }
        } else {
            sample.failures[experiment.name] = found->failure_reason;
        }
    }
    return sample;
}

std::vector<Sample> DiscoverySpace::read() {
    std::vector<Sample> samples;
    for (const auto& entry : store_->read_record(space_id_)) samples.push_back(assemble(entry));
    return samples;
}

std::string DiscoverySpace::record_csv() {
    std::ostringstream out;
    out << "operation_id,seq,entity_id,origin,timestamp\r\n";
    for (const auto& entry : store_->read_record(space_id_)) {
        out << entry.operation_id << "," << entry.seq << "," << entry.entity_id << ","
            << entry.origin << "," << entry.timestamp << "\r\n";
    }
    return out.str();
}

}  // namespace dspace
