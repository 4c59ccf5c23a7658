#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dspace/optimizers.hpp"

namespace dspace {

// The objective distribution of a fully characterized space: sorted ok-status
// values only, failed points excluded.
struct SpaceCDF {
    std::vector<double> values;  // ascending
    Objective::Direction direction = Objective::Direction::minimize;

    static SpaceCDF from_values(std::vector<double> ok_values, Objective::Direction direction);

    std::size_t size() const { return values.size(); }

    // Number of points in the best-5% target region: ceil(0.05 * n), so the
    // region is never empty.
    std::size_t target_region_size() const;
};

// Percent of ok points that the value outperforms-or-ties under the
// direction; the optimum scores 100.
double best_percentile(double value, const SpaceCDF& cdf);

// Overlap of the two top-5 sets as a percent; rankings are best-first id
// sequences of at least 5 entries.
double top5_overlap(const std::vector<std::string>& predicted_ranking,
                    const std::vector<std::string>& true_ranking);

// Smallest rank gap g whose mean sorted-true-value difference reaches the
// model's mean absolute error; n when no gap up to n-1 qualifies.
std::size_t rank_resolution(const std::vector<double>& predicted,
                            const std::vector<double>& true_values);

// New measurements divided by total samples of one operation.
double normalized_cost(std::uint64_t new_measurements, std::uint64_t reused);
double normalized_cost(const OperationResult& result);

// Mean normalized cost of the i-th run over random permutations of run order,
// replaying each run's proposal sequence against an initially empty simulated
// store: a configuration is reused iff an earlier run in the permutation
// proposed it.
std::vector<double> average_normalized_cost(const std::vector<std::vector<std::string>>& runs,
                                            std::size_t permutations = 100,
                                            std::uint64_t seed = 0);

// P(at least one of K targets in n uniform draws without replacement from N)
// = 1 - C(N-K, n) / C(N, n), evaluated in log space.
double hypergeometric_success(std::uint64_t N, std::uint64_t K, std::uint64_t n);

// Time saved over brute-force characterization, as a percent.
double percent_savings(double cost_new, double cost_all);
double percent_savings(std::uint64_t new_measurements, std::uint64_t total_points,
                       double per_point_cost = 1.0);

}  // namespace dspace
