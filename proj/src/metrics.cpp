#include "dspace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dspace {

SpaceCDF SpaceCDF::from_values(std::vector<double> ok_values, Objective::Direction direction) {
    SpaceCDF cdf;
    cdf.values = std::move(ok_values);
    cdf.direction = direction;
    std::sort(cdf.values.begin(), cdf.values.end());
    return cdf;
}

std::size_t SpaceCDF::target_region_size() const {
    return static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(values.size())));
}

double best_percentile(double value, const SpaceCDF& cdf) {
    if (cdf.values.empty()) throw InsufficientDataError("best_percentile over an empty distribution");
    std::size_t outperformed = 0;
    for (double v : cdf.values) {
        bool beaten = cdf.direction == Objective::Direction::minimize ? v >= value : v <= value;
        if (beaten) ++outperformed;
    }
    return 100.0 * static_cast<double>(outperformed) / static_cast<double>(cdf.values.size());
}

double top5_overlap(const std::vector<std::string>& predicted_ranking,
                    const std::vector<std::string>& true_ranking) {
    if (predicted_ranking.size() < 5 || true_ranking.size() < 5)
        throw InsufficientDataError("top5_overlap needs at least 5 ranked points per side");
    std::set<std::string> predicted(predicted_ranking.begin(), predicted_ranking.begin() + 5);
    std::size_t shared = 0;
    for (std::size_t i = 0; i < 5; ++i)
        if (predicted.count(true_ranking[i]) > 0) ++shared;
    return 100.0 * static_cast<double>(shared) / 5.0;
}

std::size_t rank_resolution(const std::vector<double>& predicted,
                            const std::vector<double>& true_values) {
    if (predicted.size() != true_values.size())
        throw InsufficientDataError("rank_resolution over mismatched sample lengths");
    std::size_t n = true_values.size();
    if (n < 2) throw InsufficientDataError("rank_resolution needs at least 2 points");

    double error = 0.0;
    for (std::size_t i = 0; i < n; ++i) error += std::abs(predicted[i] - true_values[i]);
    error /= static_cast<double>(n);

    std::vector<double> sorted = true_values;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t g = 1; g <= n - 1; ++g) {
        double gap = 0.0;
        for (std::size_t i = 0; i + g < n; ++i) gap += std::abs(sorted[i + g] - sorted[i]);
        gap /= static_cast<double>(n - g);
        if (gap >= error) return g;
    }
    return n;
}

double normalized_cost(std::uint64_t new_measurements, std::uint64_t reused) {
    std::uint64_t total = new_measurements + reused;
    if (total == 0) throw InsufficientDataError("normalized cost of an empty operation");
    return static_cast<double>(new_measurements) / static_cast<double>(total);
}

double normalized_cost(const OperationResult& result) {
    return normalized_cost(result.new_measurements, result.reused);
}

std::vector<double> average_normalized_cost(const std::vector<std::vector<std::string>>& runs,
                                            std::size_t permutations, std::uint64_t seed) {
    if (runs.empty()) return {};
    if (permutations == 0) throw ConfigurationError("at least one permutation is required");
    for (const auto& run : runs)
        if (run.empty()) throw InsufficientDataError("normalized cost of an empty operation");

    std::mt19937_64 rng(seed);
    auto uniform_index = [&rng](std::size_t n) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
    };

    std::vector<double> sums(runs.size(), 0.0);
    std::vector<std::size_t> order(runs.size());
    for (std::size_t p = 0; p < permutations; ++p) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[uniform_index(i)]);
        std::set<std::string> seen;
        for (std::size_t position = 0; position < order.size(); ++position) {
            const auto& run = runs[order[position]];
            std::size_t fresh = 0;
            for (const auto& id : run)
                if (seen.insert(id).second) ++fresh;
            sums[position] +=
                static_cast<double>(fresh) / static_cast<double>(run.size());
        }
    }
    for (double& s : sums) s /= static_cast<double>(permutations);
    return sums;
}

double hypergeometric_success(std::uint64_t N, std::uint64_t K, std::uint64_t n) {
    if (K > N) throw ConfigurationError("target count exceeds space size");
    if (n > N) throw ConfigurationError("draw count exceeds space size");
    if (K == 0 || n == 0) return 0.0;
    if (n > N - K) return 1.0;

    // log C(N-K,n) - log C(N,n) = sum_i log((N-K-i)/(N-i)); the ratio form
    // keeps every term O(1) where the factorial form cancels huge lgammas.
    double log_miss = 0.0;
    for (std::uint64_t i = 0; i < n; ++i)
        log_miss += std::log1p(-static_cast<double>(K) / static_cast<double>(N - i));
    return 1.0 - std::exp(log_miss);
}

double percent_savings(double cost_new, double cost_all) {
    if (!(cost_all > 0.0)) throw ConfigurationError("total characterization cost must be positive");
    if (cost_new > cost_all)
        throw ConfigurationError("new-measurement cost exceeds the total characterization cost");
    return (1.0 - cost_new / cost_all) * 100.0;
}

double percent_savings(std::uint64_t new_measurements, std::uint64_t total_points,
                       double per_point_cost) {
    return percent_savings(static_cast<double>(new_measurements) * per_point_cost,
                           static_cast<double>(total_points) * per_point_cost);
}

}  // namespace dspace
