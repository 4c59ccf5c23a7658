#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dspace/discovery.hpp"
#include "dspace/metrics.hpp"
#include "dspace/stats.hpp"

namespace dspace {

// A property-space clustering of source samples: assignments, centroids in
// z-scored feature space, and the normalization that produced it.
struct ClusterModel {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;
    std::vector<std::vector<double>> centroids;
    double silhouette = 0.0;
    std::vector<std::string> properties;
    std::vector<double> feature_mean;
    std::vector<double> feature_stddev;
};

// The transfer criteria verdict: transferable iff r > 0.7 and p < 0.01.
struct TransferDecision {
    double r = 0.0;
    double p = 1.0;
    bool transfer = false;
    std::size_t n = 0;
};

// Affine map from source to target property values.
struct SurrogateModel {
    double slope = 0.0;
    double intercept = 0.0;
    std::string source_property;
    stats::LinearFit fit;

    double predict(double source_value) const { return slope * source_value + intercept; }
};

enum class SelectionMethod { clustering, top5, linspace };

SelectionMethod selection_from_string(const std::string& text);
std::string to_string(SelectionMethod method);

struct RepresentativePair {
    std::string source_entity_id;
    Configuration source_configuration;
    double source_value = 0.0;
    std::string target_entity_id;
    Configuration target_configuration;
    std::optional<double> target_value;
    std::string target_origin;
    std::string target_status;
};

struct Prediction {
    std::string entity_id;
    Configuration configuration;
    double value = 0.0;
};

struct QualityMetrics {
    double best_percent = 0.0;
    double top5_percent = 0.0;
    std::size_t rank_resolution = 0;
};

struct TransferReport {
    std::string source_space_id;
    std::string target_space_id;
    std::string property;
    TransferDecision decision;
    stats::LinearFit fit;
    std::optional<SurrogateModel> surrogate;
    std::optional<ClusterModel> cluster;
    std::vector<RepresentativePair> representatives;
    std::vector<Prediction> predictions;  // non-representative remainder
    std::optional<QualityMetrics> quality;
    std::optional<double> percent_savings;
    std::string pred_space_id;
    std::uint64_t target_new_measurements = 0;
};

// Clusters feature rows (one row per sample) with k-means across k_min..k_max
// (defaults 2..min(10, n-1)), 10 seed-deterministic restarts per k, choosing
// the k with the best mean silhouette, ties toward smaller k. Rows are
// z-scored per feature first; all-constant features -> DegenerateDataError.
ClusterModel cluster_samples(const std::vector<std::vector<double>>& rows,
                             const std::vector<std::string>& properties, std::size_t k_min = 0,
                             std::size_t k_max = 0);

// Mean over points of (b - a) / max(a, b); singleton clusters contribute 0.
double silhouette_score(const std::vector<std::vector<double>>& points,
                        const std::vector<std::size_t>& assignments);

// Per cluster, the index of the sample nearest its centroid (Euclidean in the
// model's normalized space; ties to the lexicographically smaller id).
std::vector<std::size_t> representatives_by_clustering(const ClusterModel& model,
                                                       const std::vector<std::vector<double>>& rows,
                                                       const std::vector<std::string>& ids);

// Positions (0-based) into a best-first ranking: top5 takes ranks 1..5,
// linspace takes `count` evenly spaced ranks with both endpoints included.
std::vector<std::size_t> representatives_by_rank(std::size_t n_ranked, SelectionMethod method,
                                                 std::size_t count);

TransferDecision evaluate_transfer_criteria(const stats::LinearFit& fit);

struct TransferJob {
    std::string source_space_id;
    std::string target_space_id;
    ValueMapping mapping;
    std::string property;
    SelectionMethod selection = SelectionMethod::clustering;
    Objective::Direction direction = Objective::Direction::minimize;
    std::size_t k_min = 0;          // 0 -> default
    std::size_t k_max = 0;          // 0 -> default
    std::size_t linspace_count = 5;
    std::string operation_id;       // empty -> derived from the space ids
    std::optional<std::string> ground_truth_csv;
};

// The full pipeline: select source representatives, translate them, sample
// the target, fit, decide; on transfer, synthesize the surrogate-predictor
// space "<target>-pred" and predict every remaining target point that has a
// source measurement, logging them with origin=predicted.
TransferReport run_rssc(std::shared_ptr<SampleStore> store,
                        std::shared_ptr<ActuatorRegistry> registry, const TransferJob& job);

nlohmann::json transfer_report_to_json(const TransferReport& report);

// RFC-4180 CSV of the predictions: dimension columns then the predicted value.
std::string predictions_csv(const TransferReport& report);

}  // namespace dspace
