#include "dspace/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <openssl/evp.h>

namespace dspace {

std::string value_text(const Value& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    double d = std::get<double>(v);
    if (d == 0.0) d = 0.0;  // collapse -0
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", d);
        return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", d);
    std::string s(buf);
    if (s.find('.') != std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        while (!s.empty() && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
    }
    return s;
}

bool value_equal(const Value& a, const Value& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<std::string>(a))
        return std::get<std::string>(a) == std::get<std::string>(b);
    return value_text(a) == value_text(b);
}

bool value_less(const Value& a, const Value& b) {
    return value_text(a) < value_text(b);
}

std::string to_string(DimensionKind kind) {
    return kind == DimensionKind::categorical ? "categorical" : "discrete-numeric";
}

DimensionKind dimension_kind_from_string(const std::string& text) {
    if (text == "categorical") return DimensionKind::categorical;
    if (text == "discrete-numeric") return DimensionKind::discrete_numeric;
    throw ConfigurationError("unknown dimension kind '" + text + "'");
}

void Dimension::validate() const {
    if (name.empty()) throw ConfigurationError("dimension has an empty name");
    if (values.empty()) throw ConfigurationError("dimension '" + name + "' has no values");
    std::set<std::string> seen;
    for (const auto& v : values) {
        if (kind == DimensionKind::categorical && !std::holds_alternative<std::string>(v))
            throw ConfigurationError("dimension '" + name + "' mixes numeric values into a categorical dimension");
        if (kind == DimensionKind::discrete_numeric && !std::holds_alternative<double>(v))
            throw ConfigurationError("dimension '" + name + "' mixes string values into a discrete-numeric dimension");
        if (!seen.insert(value_text(v)).second)
            throw ConfigurationError("dimension '" + name + "' lists value '" + value_text(v) + "' twice");
    }
    if (!weights.empty()) {
        if (weights.size() != values.size())
            throw ConfigurationError("dimension '" + name + "' has " + std::to_string(weights.size()) +
                                     " weights for " + std::to_string(values.size()) + " values");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0))
                throw ConfigurationError("dimension '" + name + "' has a negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigurationError("dimension '" + name + "' weights sum to " + std::to_string(sum) +
                                     ", expected 1");
    }
}

bool Dimension::admits(const Value& v) const {
    for (const auto& candidate : values)
        if (value_equal(candidate, v)) return true;
    return false;
}

void ProbabilitySpace::validate() const {
    std::set<std::string> names;
    for (const auto& dim : dimensions) {
        dim.validate();
        if (!names.insert(dim.name).second)
            throw ConfigurationError("duplicate dimension name '" + dim.name + "'");
    }
}

const Dimension* ProbabilitySpace::find(const std::string& name) const {
    for (const auto& dim : dimensions)
        if (dim.name == name) return &dim;
    return nullptr;
}

bool Configuration::operator==(const Configuration& other) const {
    if (assignments.size() != other.assignments.size()) return false;
    auto it = other.assignments.begin();
    for (const auto& [name, value] : assignments) {
        if (it->first != name || !value_equal(it->second, value)) return false;
        ++it;
    }
    return true;
}

void Experiment::validate() const {
    if (name.empty()) throw ConfigurationError("experiment has an empty name");
    if (measured_properties.empty())
        throw ConfigurationError("experiment '" + name + "' measures no properties");
    std::set<std::string> props(measured_properties.begin(), measured_properties.end());
    if (props.size() != measured_properties.size())
        throw ConfigurationError("experiment '" + name + "' lists a measured property twice");
}

void ActionSpace::validate() const {
    std::set<std::string> names;
    std::map<std::string, std::string> property_owner;
    for (const auto& exp : experiments) {
        exp.validate();
        if (!names.insert(exp.name).second)
            throw ConfigurationError("duplicate experiment name '" + exp.name + "'");
        for (const auto& prop : exp.measured_properties) {
            auto [it, inserted] = property_owner.emplace(prop, exp.name);
            if (!inserted)
                throw ConfigurationError("property '" + prop + "' is measured by both '" + it->second +
                                         "' and '" + exp.name + "'");
        }
    }
}

const Experiment* ActionSpace::find(const std::string& name) const {
    for (const auto& exp : experiments)
        if (exp.name == name) return &exp;
    return nullptr;
}

void ValueMapping::validate() const {
    for (const auto& [dim, pairs] : dimensions) {
        std::set<std::string> sources, targets;
        for (const auto& [from, to] : pairs) {
            if (!sources.insert(value_text(from)).second)
                throw MappingError("mapping for dimension '" + dim + "' lists source value '" +
                                   value_text(from) + "' twice");
            if (!targets.insert(value_text(to)).second)
                throw MappingError("mapping for dimension '" + dim + "' maps two values to '" +
                                   value_text(to) + "'");
        }
    }
}

ValueMapping ValueMapping::inverse() const {
    ValueMapping inv;
    for (const auto& [dim, pairs] : dimensions) {
        auto& out = inv.dimensions[dim];
        for (const auto& [from, to] : pairs) out.emplace_back(to, from);
    }
    return inv;
}

std::uint64_t cardinality(const ProbabilitySpace& space) {
    std::uint64_t count = 1;
    for (const auto& dim : space.dimensions) count *= dim.values.size();
    return count;
}

bool contains(const ProbabilitySpace& space, const Configuration& config) {
    if (config.assignments.size() != space.dimensions.size()) return false;
    for (const auto& dim : space.dimensions) {
        auto it = config.assignments.find(dim.name);
        if (it == config.assignments.end() || !dim.admits(it->second)) return false;
    }
    return true;
}

std::vector<Configuration> enumerate(const ProbabilitySpace& space) {
    std::vector<Configuration> out;
    std::uint64_t total = cardinality(space);
    out.reserve(total);
    std::vector<std::size_t> index(space.dimensions.size(), 0);
    for (std::uint64_t i = 0; i < total; ++i) {
        Configuration config;
        for (std::size_t d = 0; d < space.dimensions.size(); ++d)
            config.assignments[space.dimensions[d].name] = space.dimensions[d].values[index[d]];
        out.push_back(std::move(config));
        for (std::size_t d = space.dimensions.size(); d-- > 0;) {
            if (++index[d] < space.dimensions[d].values.size()) break;
            index[d] = 0;
        }
    }
    return out;
}

std::string canonical_id(const Configuration& config) {
    std::string material;
    for (const auto& [name, value] : config.assignments) {
        material += name;
        material += '=';
        material += value_text(value);
        material += '\n';
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, material.data(), material.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &digest_len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("digest computation failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string id;
    id.reserve(2 * digest_len);
    for (unsigned int i = 0; i < digest_len; ++i) {
        id += hex[digest[i] >> 4];
        id += hex[digest[i] & 0x0f];
    }
    return id;
}

namespace {

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Configuration draw(const ProbabilitySpace& space, std::mt19937_64& rng) {
    Configuration config;
    for (const auto& dim : space.dimensions) {
        double u = unit_uniform(rng);
        std::size_t chosen = dim.values.size() - 1;
        if (dim.weights.empty()) {
            chosen = std::min(chosen, static_cast<std::size_t>(u * dim.values.size()));
        } else {
            double cumulative = 0.0;
            for (std::size_t i = 0; i < dim.weights.size(); ++i) {
                cumulative += dim.weights[i];
                if (u < cumulative) {
                    chosen = i;
                    break;
                }
            }
        }
        config.assignments[dim.name] = dim.values[chosen];
    }
    return config;
}

Configuration map_configuration(const Configuration& config, const ValueMapping& mapping) {
    Configuration out;
    for (const auto& [name, value] : config.assignments) {
        auto it = mapping.dimensions.find(name);
        if (it == mapping.dimensions.end()) {
            out.assignments[name] = value;
            continue;
        }
        bool mapped = false;
        for (const auto& [from, to] : it->second) {
            if (value_equal(from, value)) {
                out.assignments[name] = to;
                mapped = true;
                break;
            }
        }
        if (!mapped)
            throw MappingError("mapping for dimension '" + name + "' does not cover value '" +
                               value_text(value) + "'");
    }
    return out;
}

}  // namespace dspace
