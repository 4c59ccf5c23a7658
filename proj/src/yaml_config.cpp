#include "dspace/yaml_config.hpp"

#include <yaml-cpp/yaml.h>

namespace dspace {

namespace {

YAML::Node load_document(const std::string& path) {
    try {
        return YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw ConfigurationError("cannot load '" + path + "': " + e.what());
    }
}

YAML::Node require(const YAML::Node& node, const std::string& key, const std::string& field) {
    if (!node.IsMap()) throw SchemaError(field, "expected a mapping");
    YAML::Node child = node[key];
    if (!child.IsDefined() || child.IsNull())
        throw SchemaError(field + "." + key, "required field is missing");
    return child;
}

std::string require_string(const YAML::Node& node, const std::string& key,
                           const std::string& field) {
    YAML::Node child = require(node, key, field);
    if (!child.IsScalar()) throw SchemaError(field + "." + key, "expected a string");
    return child.as<std::string>();
}

// Plain unquoted scalars that parse as numbers become numbers; quoted scalars
// and everything else stay strings.
Value scalar_value(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) throw SchemaError(field, "expected a scalar");
    if (node.Tag() != "!") {
        try {
            return node.as<double>();
        } catch (const YAML::Exception&) {
        }
    }
    return node.as<std::string>();
}

nlohmann::json yaml_to_json(const YAML::Node& node, const std::string& field) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
            return nullptr;
        case YAML::NodeType::Scalar: {
            if (node.Tag() != "!") {
                try {
                    return node.as<bool>();
                } catch (const YAML::Exception&) {
                }
                try {
                    return node.as<std::int64_t>();
                } catch (const YAML::Exception&) {
                }
                try {
                    return node.as<double>();
                } catch (const YAML::Exception&) {
                }
            }
            return node.as<std::string>();
        }
        case YAML::NodeType::Sequence: {
            nlohmann::json out = nlohmann::json::array();
            std::size_t i = 0;
            for (const auto& item : node)
                out.push_back(yaml_to_json(item, field + "[" + std::to_string(i++) + "]"));
            return out;
        }
        case YAML::NodeType::Map: {
            nlohmann::json out = nlohmann::json::object();
            for (const auto& item : node) {
                std::string key = item.first.as<std::string>();
                out[key] = yaml_to_json(item.second, field + "." + key);
            }
            return out;
        }
        default:
            throw SchemaError(field, "unsupported YAML node");
    }
}

}  // namespace

SpaceDocument load_space_yaml(const std::string& path) {
    YAML::Node root = load_document(path);
    if (!root.IsMap()) throw SchemaError("", "document root must be a mapping");

    SpaceDocument doc;
    YAML::Node space = require(root, "space", "");
    doc.space_id = require_string(space, "name", "space");

    YAML::Node dimensions = require(space, "dimensions", "space");
    if (!dimensions.IsSequence() || dimensions.size() == 0)
        throw SchemaError("space.dimensions", "expected a non-empty sequence");
    std::size_t d = 0;
    for (const auto& node : dimensions) {
        std::string field = "space.dimensions[" + std::to_string(d++) + "]";
        Dimension dim;
        dim.name = require_string(node, "name", field);
        std::string kind = require_string(node, "kind", field);
        try {
            dim.kind = dimension_kind_from_string(kind);
        } catch (const ConfigurationError&) {
            throw SchemaError(field + ".kind",
                              "expected 'categorical' or 'discrete-numeric', got '" + kind + "'");
        }
        YAML::Node values = require(node, "values", field);
        if (!values.IsSequence() || values.size() == 0)
            throw SchemaError(field + ".values", "expected a non-empty sequence");
        std::size_t v = 0;
        for (const auto& value : values) {
            std::string value_field = field + ".values[" + std::to_string(v++) + "]";
            if (!value.IsScalar()) throw SchemaError(value_field, "expected a scalar");
            if (dim.kind == DimensionKind::discrete_numeric) {
                try {
                    dim.values.emplace_back(value.as<double>());
                } catch (const YAML::Exception&) {
                    throw SchemaError(value_field, "expected a number");
                }
            } else {
                dim.values.emplace_back(value.as<std::string>());
            }
        }
        YAML::Node weights = node["weights"];
        if (weights.IsDefined() && !weights.IsNull()) {
            if (!weights.IsSequence()) throw SchemaError(field + ".weights", "expected a sequence");
            std::size_t w = 0;
            for (const auto& weight : weights) {
                std::string weight_field = field + ".weights[" + std::to_string(w++) + "]";
                try {
                    dim.weights.push_back(weight.as<double>());
                } catch (const YAML::Exception&) {
                    throw SchemaError(weight_field, "expected a number");
                }
            }
        }
        doc.space.dimensions.push_back(std::move(dim));
    }

    YAML::Node actions = require(root, "actions", "");
    if (!actions.IsSequence() || actions.size() == 0)
        throw SchemaError("actions", "expected a non-empty sequence");
    std::size_t a = 0;
    for (const auto& node : actions) {
        std::string field = "actions[" + std::to_string(a++) + "]";
        Experiment exp;
        exp.name = require_string(node, "name", field);
        YAML::Node actuator = require(node, "actuator", field);
        exp.actuator_kind = require_string(actuator, "kind", field + ".actuator");
        YAML::Node settings = actuator["settings"];
        if (settings.IsDefined() && !settings.IsNull()) {
            exp.actuator_settings = yaml_to_json(settings, field + ".actuator.settings");
            if (!exp.actuator_settings.is_object())
                throw SchemaError(field + ".actuator.settings", "expected a mapping");
        }
        YAML::Node measures = require(node, "measures", field);
        if (!measures.IsSequence() || measures.size() == 0)
            throw SchemaError(field + ".measures", "expected a non-empty sequence");
        for (const auto& prop : measures) {
            if (!prop.IsScalar()) throw SchemaError(field + ".measures", "expected strings");
            exp.measured_properties.push_back(prop.as<std::string>());
        }
        YAML::Node parameters = node["parameters"];
        if (parameters.IsDefined() && !parameters.IsNull()) {
            if (!parameters.IsMap()) throw SchemaError(field + ".parameters", "expected a mapping");
            for (const auto& item : parameters) {
                std::string key = item.first.as<std::string>();
                exp.parameters[key] =
                    scalar_value(item.second, field + ".parameters." + key);
            }
        }
        doc.actions.experiments.push_back(std::move(exp));
    }

    YAML::Node policy = root["reuse_policy"];
    if (policy.IsDefined() && !policy.IsNull()) {
        std::string text = policy.as<std::string>();
        try {
            doc.policy = reuse_policy_from_string(text);
        } catch (const ConfigurationError&) {
            throw SchemaError("reuse_policy",
                              "expected 'reuse-only' or 'always-measure', got '" + text + "'");
        }
    }

    try {
        doc.space.validate();
        doc.actions.validate();
    } catch (const ConfigurationError& e) {
        throw SchemaError("space", e.what());
    }
    return doc;
}

TransferJob load_transfer_yaml(const std::string& path) {
    YAML::Node root = load_document(path);
    if (!root.IsMap()) throw SchemaError("", "document root must be a mapping");

    TransferJob job;
    job.source_space_id = require_string(root, "source_space", "");
    job.target_space_id = require_string(root, "target_space", "");
    job.property = require_string(root, "property", "");

    YAML::Node mapping = root["mapping"];
    if (mapping.IsDefined() && !mapping.IsNull()) {
        if (!mapping.IsMap()) throw SchemaError("mapping", "expected a mapping");
        for (const auto& dim : mapping) {
            std::string name = dim.first.as<std::string>();
            if (!dim.second.IsMap())
                throw SchemaError("mapping." + name, "expected a mapping of source to target values");
            auto& pairs = job.mapping.dimensions[name];
            for (const auto& pair : dim.second) {
                pairs.emplace_back(scalar_value(pair.first, "mapping." + name),
                                   scalar_value(pair.second, "mapping." + name));
            }
        }
        try {
            job.mapping.validate();
        } catch (const Error& e) {
            throw SchemaError("mapping", e.what());
        }
    }

    YAML::Node selection = root["selection"];
    if (selection.IsDefined() && !selection.IsNull()) {
        std::string text = selection.as<std::string>();
        try {
            job.selection = selection_from_string(text);
        } catch (const ConfigurationError&) {
            throw SchemaError("selection",
                              "expected 'clustering', 'top5', or 'linspace', got '" + text + "'");
        }
    }
    YAML::Node direction = root["direction"];
    if (direction.IsDefined() && !direction.IsNull()) {
        std::string text = direction.as<std::string>();
        try {
            job.direction = direction_from_string(text);
        } catch (const ConfigurationError&) {
            throw SchemaError("direction", "expected 'min' or 'max', got '" + text + "'");
        }
    }
    YAML::Node k_range = root["k_range"];
    if (k_range.IsDefined() && !k_range.IsNull()) {
        if (!k_range.IsSequence() || k_range.size() != 2)
            throw SchemaError("k_range", "expected [lo, hi]");
        try {
            job.k_min = k_range[0].as<std::size_t>();
            job.k_max = k_range[1].as<std::size_t>();
        } catch (const YAML::Exception&) {
            throw SchemaError("k_range", "expected two integers");
        }
    }
    YAML::Node linspace_count = root["linspace_count"];
    if (linspace_count.IsDefined() && !linspace_count.IsNull()) {
        try {
            job.linspace_count = linspace_count.as<std::size_t>();
        } catch (const YAML::Exception&) {
            throw SchemaError("linspace_count", "expected an integer");
        }
    }
    YAML::Node operation_id = root["operation_id"];
    if (operation_id.IsDefined() && !operation_id.IsNull())
        job.operation_id = operation_id.as<std::string>();
    YAML::Node ground_truth = root["ground_truth"];
    if (ground_truth.IsDefined() && !ground_truth.IsNull())
        job.ground_truth_csv = ground_truth.as<std::string>();
    return job;
}

}  // namespace dspace
