#include "dspace/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dspace/stats.hpp"

namespace dspace {

Objective::Direction direction_from_string(const std::string& text) {
    if (text == "min" || text == "minimize") return Objective::Direction::minimize;
    if (text == "max" || text == "maximize") return Objective::Direction::maximize;
    throw ConfigurationError("unknown objective direction '" + text + "'");
}

std::string to_string(Objective::Direction direction) {
    return direction == Objective::Direction::minimize ? "min" : "max";
}

bool should_stop(const std::vector<double>& trajectory, std::size_t patience) {
    if (trajectory.empty() || patience == 0) return false;
    double best = trajectory[0];
    std::size_t last_improvement = 0;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        if (trajectory[i] < best) {
            best = trajectory[i];
            last_improvement = i;
        }
    }
    return trajectory.size() - 1 - last_improvement >= patience;
}

void Optimizer::bind(const ProbabilitySpace& space, std::uint64_t seed, std::size_t budget) {
    space_ = &space;
    rng_.seed(seed);
    budget_ = budget;
    proposed_.clear();
    observations_.clear();
    on_bind();
}

std::optional<Configuration> Optimizer::next_configuration() {
    if (space_ == nullptr) throw ConfigurationError("optimizer is not bound to a space");
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::optional<Configuration> config = propose();
        if (!config) return std::nullopt;
        if (proposed_.insert(canonical_id(*config)).second) return config;
    }
    return std::nullopt;
}

void Optimizer::observe(const Configuration& config, double internal_value,
                        const std::string& status) {
    observations_.emplace_back(config, internal_value);
    on_observe(config, internal_value, status);
}

double Optimizer::unit_uniform() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::size_t Optimizer::uniform_index(std::size_t n) {
    if (n == 0) throw ConfigurationError("uniform index over an empty range");
    return std::min(n - 1, static_cast<std::size_t>(unit_uniform() * static_cast<double>(n)));
}

namespace {

class RandomWalk final : public Optimizer {
public:
    std::string kind() const override { return "random_walk"; }

protected:
    std::optional<Configuration> propose() override { return draw(*space_, rng_); }
};

// Stratifies every dimension's value indices evenly across the planned budget,
// shuffling each dimension's column independently.
class LatinHypercube final : public Optimizer {
public:
    std::string kind() const override { return "latin_hypercube"; }

protected:
    void on_bind() override {
        cursor_ = 0;
        plans_.clear();
        if (budget_ == 0) return;
        for (const auto& dim : space_->dimensions) {
            std::vector<std::size_t> plan(budget_);
            for (std::size_t i = 0; i < budget_; ++i) plan[i] = i * dim.values.size() / budget_;
            for (std::size_t i = plan.size(); i > 1; --i)
                std::swap(plan[i - 1], plan[uniform_index(i)]);
            plans_.push_back(std::move(plan));
        }
    }

    std::optional<Configuration> propose() override {
        if (cursor_ >= budget_ || plans_.empty()) return draw(*space_, rng_);
        Configuration config;
        for (std::size_t d = 0; d < space_->dimensions.size(); ++d) {
            const Dimension& dim = space_->dimensions[d];
            config.assignments[dim.name] = dim.values[plans_[d][cursor_]];
        }
        ++cursor_;
        return config;
    }

private:
    std::vector<std::vector<std::size_t>> plans_;
    std::size_t cursor_ = 0;
};

// Single-dimension neighbor moves from an accepted current point, geometric
// cooling, Metropolis acceptance on observation.
class SimulatedAnnealing final : public Optimizer {
public:
    std::string kind() const override { return "simulated_annealing"; }

protected:
    void on_bind() override {
        temperature_ = 1.0;
        has_current_ = false;
    }

    std::optional<Configuration> propose() override {
        if (!has_current_) return draw(*space_, rng_);
        Configuration config = current_;
        const Dimension& dim = space_->dimensions[uniform_index(space_->dimensions.size())];
        std::size_t m = dim.values.size();
        if (m > 1) {
            std::size_t at = 0;
            for (std::size_t i = 0; i < m; ++i)
                if (value_equal(dim.values[i], config.assignments.at(dim.name))) {
                    at = i;
                    break;
                }
            bool up = unit_uniform() < 0.5;
            std::size_t next = at;
            if (up && at + 1 < m)
                next = at + 1;
            else if (!up && at > 0)
                next = at - 1;
            else
                next = up ? at - 1 : at + 1;
            config.assignments[dim.name] = dim.values[next];
        }
        return config;
    }

    void on_observe(const Configuration& config, double internal_value,
                    const std::string& status) override {
        (void)status;
        if (!has_current_) {
            current_ = config;
            current_value_ = internal_value;
            has_current_ = true;
        } else {
            double delta = internal_value - current_value_;
            if (delta < 0.0 ||
                unit_uniform() < std::exp(-delta / std::max(temperature_, 1e-12))) {
                current_ = config;
                current_value_ = internal_value;
            }
        }
        temperature_ *= 0.95;
    }

private:
    double temperature_ = 1.0;
    Configuration current_;
    double current_value_ = 0.0;
    bool has_current_ = false;
};

// Distance-weighted nearest-neighbor surrogate over one-hot/ordinal encodings;
// proposes the unseen point with the best expected improvement, with epsilon-
// greedy exploration and a random warm-up of twice the dimension count.
class SmboLite final : public Optimizer {
public:
    std::string kind() const override { return "smbo_lite"; }

protected:
    void on_bind() override {
        warmup_ = 2 * space_->dimensions.size();
        pool_.clear();
        if (cardinality(*space_) <= 4096) pool_ = enumerate(*space_);
    }

    std::optional<Configuration> propose() override {
        if (observations_.size() < warmup_) return draw(*space_, rng_);
        if (unit_uniform() < 0.1) return draw(*space_, rng_);

        std::vector<const Configuration*> candidates;
        if (!pool_.empty()) {
            for (const auto& config : pool_)
                if (proposed_.find(canonical_id(config)) == proposed_.end())
                    candidates.push_back(&config);
        } else {
            scratch_.clear();
            for (int attempt = 0; attempt < 1000 && scratch_.size() < 256; ++attempt) {
                Configuration config = draw(*space_, rng_);
                if (proposed_.find(canonical_id(config)) == proposed_.end())
                    scratch_.push_back(std::move(config));
            }
            for (const auto& config : scratch_) candidates.push_back(&config);
        }
        if (candidates.empty()) return draw(*space_, rng_);

        double best_observed = std::numeric_limits<double>::infinity();
        for (const auto& [config, value] : observations_) {
            (void)config;
            best_observed = std::min(best_observed, value);
        }

        const Configuration* chosen = nullptr;
        double best_ei = -1.0;
        for (const Configuration* candidate : candidates) {
            auto [mu, sigma] = surrogate(*candidate);
            double z = (best_observed - mu) / sigma;
            double ei = sigma * (z * stats::normal_cdf(z) + stats::normal_pdf(z));
            if (ei > best_ei) {
                best_ei = ei;
                chosen = candidate;
            }
        }
        return *chosen;
    }

private:
    std::vector<double> encode(const Configuration& config) const {
        std::vector<double> features;
        for (const auto& dim : space_->dimensions) {
            const Value& v = config.assignments.at(dim.name);
            std::size_t at = 0;
            for (std::size_t i = 0; i < dim.values.size(); ++i)
                if (value_equal(dim.values[i], v)) {
                    at = i;
                    break;
                }
            if (dim.kind == DimensionKind::discrete_numeric) {
                features.push_back(dim.values.size() > 1
                                       ? static_cast<double>(at) /
                                             static_cast<double>(dim.values.size() - 1)
                                       : 0.0);
            } else {
                for (std::size_t i = 0; i < dim.values.size(); ++i)
                    features.push_back(i == at ? 1.0 : 0.0);
            }
        }
        return features;
    }

    std::pair<double, double> surrogate(const Configuration& candidate) const {
        std::vector<double> features = encode(candidate);
        std::vector<std::pair<double, double>> neighbors;  // (distance, value)
        for (const auto& [config, value] : observations_) {
            std::vector<double> other = encode(config);
            double d2 = 0.0;
            for (std::size_t i = 0; i < features.size(); ++i) {
                double diff = features[i] - other[i];
                d2 += diff * diff;
            }
            neighbors.emplace_back(std::sqrt(d2), value);
        }
        std::size_t k = std::min<std::size_t>(5, neighbors.size());
        std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(k),
                          neighbors.end());
        double weight_sum = 0.0, mean = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double w = 1.0 / (neighbors[i].first + 1e-9);
            weight_sum += w;
            mean += w * neighbors[i].second;
        }
        mean /= weight_sum;
        double dispersion = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double w = 1.0 / (neighbors[i].first + 1e-9);
            dispersion += w * (neighbors[i].second - mean) * (neighbors[i].second - mean);
        }
        dispersion = std::sqrt(dispersion / weight_sum);
        return {mean, std::max(dispersion, 1e-9)};
    }

    std::size_t warmup_ = 0;
    std::vector<Configuration> pool_;
    std::vector<Configuration> scratch_;
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(const std::string& kind) {
    if (kind == "random_walk" || kind == "random") return std::make_unique<RandomWalk>();
    if (kind == "latin_hypercube" || kind == "lhs") return std::make_unique<LatinHypercube>();
    if (kind == "simulated_annealing" || kind == "anneal")
        return std::make_unique<SimulatedAnnealing>();
    if (kind == "smbo_lite" || kind == "smbo") return std::make_unique<SmboLite>();
    throw ConfigurationError("unknown optimizer kind '" + kind + "'");
}

OperationResult run_optimization(DiscoverySpace& ds, Optimizer& optimizer,
                                 const Objective& objective, std::size_t patience,
                                 std::uint64_t seed, std::size_t budget,
                                 const std::string& operation_id) {
    bool property_measured = false;
    for (const auto& experiment : ds.actions().experiments)
        for (const auto& prop : experiment.measured_properties)
            if (prop == objective.property) property_measured = true;
    if (!property_measured)
        throw ConfigurationError("objective property '" + objective.property +
                                 "' is not measured by any experiment in space '" + ds.space_id() +
                                 "'");

    std::uint64_t total = cardinality(ds.space());
    if (budget == 0 || budget > total) budget = static_cast<std::size_t>(total);
    optimizer.bind(ds.space(), seed, budget);

    OperationResult result;
    result.operation_id = operation_id;
    result.optimizer = optimizer.kind();
    result.objective = objective;

    bool minimize = objective.direction == Objective::Direction::minimize;
    std::vector<double> internal_trajectory;
    double worst_ok_internal = 0.0;
    bool any_ok = false;
    double best_internal = std::numeric_limits<double>::infinity();

    for (std::size_t step = 0; step < budget; ++step) {
        std::optional<Configuration> config = optimizer.next_configuration();
        if (!config) {
            result.stop_reason = "exhausted";
            break;
        }
        Sample sample = ds.sample(*config, operation_id);

        auto it = sample.property_values.find(objective.property);
        bool ok = it != sample.property_values.end() && it->second.status == "ok";
        double internal_value, native_value;
        if (ok) {
            native_value = it->second.value;
            internal_value = minimize ? native_value : -native_value;
            worst_ok_internal = any_ok ? std::max(worst_ok_internal, internal_value) : internal_value;
            any_ok = true;
        } else {
            internal_value = (any_ok ? worst_ok_internal : 0.0) + 1.0;
            native_value = minimize ? internal_value : -internal_value;
        }
        internal_trajectory.push_back(internal_value);

        TrajectoryStep ts;
        ts.configuration = *config;
        ts.entity_id = sample.entity_id;
        ts.value = native_value;
        ts.status = ok ? "ok" : "failed";
        ts.origin = sample.origin;
        result.steps.push_back(ts);
        result.trajectory.push_back(native_value);
        if (sample.origin == "measured")
            ++result.new_measurements;
        else
            ++result.reused;
        if (!ok) ++result.failed;
        ++result.steps_taken;

        if (ok && internal_value < best_internal) {
            best_internal = internal_value;
            result.best_configuration = *config;
            result.best_value = native_value;
            result.has_best = true;
        }

        optimizer.observe(*config, internal_value, ok ? "ok" : "failed");
        if (should_stop(internal_trajectory, patience)) {
            result.stop_reason = "stopping-rule";
            break;
        }
    }
    if (result.stop_reason.empty()) result.stop_reason = "budget";
    return result;
}

}  // namespace dspace
