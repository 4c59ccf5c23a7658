#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dspace/discovery.hpp"
#include "dspace/space.hpp"

namespace dspace {

struct Objective {
    enum class Direction { minimize, maximize };

    std::string property;
    Direction direction = Direction::minimize;
};

Objective::Direction direction_from_string(const std::string& text);
std::string to_string(Objective::Direction direction);

struct TrajectoryStep {
    Configuration configuration;
    std::string entity_id;
    double value = 0.0;       // native objective value (sentinel when failed)
    std::string status;       // ok | failed
    std::string origin;       // measured | reused
};

struct OperationResult {
    std::string operation_id;
    std::string optimizer;
    Objective objective;
    std::vector<TrajectoryStep> steps;
    std::vector<double> trajectory;  // native objective values, step order
    Configuration best_configuration;
    double best_value = 0.0;
    bool has_best = false;
    std::uint64_t new_measurements = 0;
    std::uint64_t reused = 0;
    std::uint64_t failed = 0;
    std::uint64_t steps_taken = 0;
    std::string stop_reason;  // stopping-rule | exhausted | budget
};

// True when the running best has not strictly improved over the last
// `patience` consecutive steps. Values are in minimize convention.
bool should_stop(const std::vector<double>& trajectory, std::size_t patience = 5);

// Proposal engine driving one operation. Works internally in minimize
// convention; run_optimization negates values for maximize objectives so the
// two directions choose identical configurations under identical seeds.
// next_configuration never repeats a configuration within one operation:
// repeats are rejected and re-sampled up to 100 attempts, after which the
// operation is treated as exhausted.
class Optimizer {
public:
    virtual ~Optimizer() = default;

    virtual std::string kind() const = 0;

    void bind(const ProbabilitySpace& space, std::uint64_t seed, std::size_t budget);

    std::optional<Configuration> next_configuration();

    void observe(const Configuration& config, double internal_value, const std::string& status);

protected:
    virtual void on_bind() {}
    virtual std::optional<Configuration> propose() = 0;
    virtual void on_observe(const Configuration& config, double internal_value,
                            const std::string& status) {
        (void)config;
        (void)internal_value;
        (void)status;
    }

    double unit_uniform();
    std::size_t uniform_index(std::size_t n);

    const ProbabilitySpace* space_ = nullptr;
    std::mt19937_64 rng_;
    std::size_t budget_ = 0;
    std::set<std::string> proposed_;
    // Every observed (configuration, internal value) pair; failed points
    // carry the worst-seen sentinel value.
    std::vector<std::pair<Configuration, double>> observations_;
};

std::unique_ptr<Optimizer> make_optimizer(const std::string& kind);

// Drives next_configuration/sample/observe until the stopping rule fires, the
// space is exhausted, or the budget is spent. budget 0 means the full space.
OperationResult run_optimization(DiscoverySpace& ds, Optimizer& optimizer,
                                 const Objective& objective, std::size_t patience,
                                 std::uint64_t seed, std::size_t budget,
                                 const std::string& operation_id);

}  // namespace dspace
