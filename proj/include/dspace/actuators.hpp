#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dspace/space.hpp"
#include "dspace/store.hpp"

namespace dspace {

// Executes one experiment against one configuration. Workload-level problems
// (missing characterization, failed runs, timeouts) surface as status=failed
// results, not exceptions; exceptions are reserved for misconfiguration.
class Actuator {
public:
    virtual ~Actuator() = default;

    virtual MeasurementResult measure(const Experiment& experiment,
                                      const Configuration& config) = 0;
};

// Replays an exhaustive characterization table. CSV layout:
// <dim1>,...,<dimK>,<prop1>,...,<propM>,status[,cost_s]; comma-separated,
// header row, no quoting. Rows are keyed by the exact dimension tuple; a
// configuration without a row yields failed("uncharacterized configuration").
class TabularWorkload : public Actuator {
public:
    explicit TabularWorkload(const std::string& csv_path);

    MeasurementResult measure(const Experiment& experiment, const Configuration& config) override;

    // Simulated measurement seconds for a row, when the table carries cost_s.
    std::optional<double> row_cost(const Configuration& config);

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t row_count() const { return rows_.size(); }

private:
    struct Row {
        std::map<std::string, std::string> cells;
    };

    const Row* find_row(const Configuration& config);

    std::string path_;
    std::vector<std::string> columns_;
    std::vector<Row> rows_;
    bool has_status_ = false;
    bool has_cost_ = false;
    std::map<std::string, std::size_t> index_;
    std::vector<std::string> key_columns_;
};

// Analytic objective over the configuration's dimensions: a bias plus
// per-dimension terms plus pairwise interaction terms, an optional gaussian
// noise model (deterministic per seed and configuration), and an optional
// failure predicate. Settings are a JSON object:
//   { "property": name, "bias": b,
//     "terms": [ {"dimension": d, "scale": s, "quadratic": q, "center": c}
//                | {"dimension": d, "levels": {"<value>": v, ...}} ],
//     "interactions": [ {"dimensions": [d1, d2], "scale": s}
//                       | {"dimensions": [d1, d2], "table": {"<v1>|<v2>": v}} ],
//     "noise": {"kind": "none"|"gaussian", "sigma": s}, "seed": n,
//     "failure": {"dimension": d, "values": [..]} }
class SyntheticSurface : public Actuator {
public:
    explicit SyntheticSurface(const nlohmann::json& settings);

    MeasurementResult measure(const Experiment& experiment, const Configuration& config) override;

    // The noiseless objective value.
    double objective(const Configuration& config) const;
    bool fails(const Configuration& config) const;

private:
    nlohmann::json settings_;
    std::uint64_t seed_ = 0;
    double sigma_ = 0.0;
};

// Runs an external command with configuration values substituted for {name}
// placeholders; the last stdout line must be a JSON object of property values.
// Settings: { "template": "cmd --x {x}", "timeout_s": seconds }.
class CommandRunner : public Actuator {
public:
    explicit CommandRunner(const nlohmann::json& settings);

    MeasurementResult measure(const Experiment& experiment, const Configuration& config) override;

private:
    std::string template_;
    double timeout_s_ = 60.0;
};

// Applies an affine surrogate to a configuration's stored source-property
// value; configurations without a source measurement fail. Settings:
// { "slope": a, "intercept": b, "source_property": p, "predicted_property": q }.
class SurrogateActuator : public Actuator {
public:
    SurrogateActuator(const nlohmann::json& settings, SampleStore* store);

    MeasurementResult measure(const Experiment& experiment, const Configuration& config) override;

private:
    double slope_ = 0.0;
    double intercept_ = 0.0;
    std::string source_property_;
    std::string predicted_property_;
    SampleStore* store_ = nullptr;
};

// Resolves actuator kinds to instances, caching by kind and settings so a
// table is parsed once per process.
class ActuatorRegistry {
public:
    using Factory =
        std::function<std::shared_ptr<Actuator>(const nlohmann::json& settings, SampleStore* store)>;

    void register_kind(const std::string& kind, Factory factory);

    // Unknown kind -> ConfigurationError.
    std::shared_ptr<Actuator> resolve(const std::string& kind, const nlohmann::json& settings,
                                      SampleStore* store);

    // tabular, synthetic, command, surrogate.
    static std::shared_ptr<ActuatorRegistry> with_builtins();

private:
    std::map<std::string, Factory> factories_;
    std::map<std::string, std::shared_ptr<Actuator>> cache_;
};

}  // namespace dspace
