#include "dspace/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "dspace/json_util.hpp"

namespace dspace {

SelectionMethod selection_from_string(const std::string& text) {
    if (text == "clustering") return SelectionMethod::clustering;
    if (text == "top5") return SelectionMethod::top5;
    if (text == "linspace") return SelectionMethod::linspace;
    throw ConfigurationError("unknown selection method '" + text + "'");
}

std::string to_string(SelectionMethod method) {
    switch (method) {
        case SelectionMethod::clustering: return "clustering";
        case SelectionMethod::top5: return "top5";
        default: return "linspace";
    }
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d2 += diff * diff;
    }
    return d2;
}

struct KMeansResult {
    std::vector<std::size_t> assignments;
    std::vector<std::vector<double>> centroids;
    double within_ss = std::numeric_limits<double>::infinity();
};

KMeansResult kmeans_once(const std::vector<std::vector<double>>& rows, std::size_t k,
                         std::mt19937_64& rng) {
    std::size_t n = rows.size();
    std::size_t f = rows[0].size();

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        std::size_t j = std::min(i - 1, static_cast<std::size_t>(u * static_cast<double>(i)));
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::vector<double>> centroids;
    for (std::size_t c = 0; c < k; ++c) centroids.push_back(rows[order[c]]);

    std::vector<std::size_t> assignments(n, 0);
    for (int iteration = 0; iteration < 100; ++iteration) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d2 = squared_distance(rows[i], centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double d2 = squared_distance(rows[i], centroids[c]);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            if (assignments[i] != best) {
                assignments[i] = best;
                changed = true;
            }
        }
        std::vector<std::vector<double>> next(k, std::vector<double>(f, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assignments[i]];
            for (std::size_t j = 0; j < f; ++j) next[assignments[i]][j] += rows[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Reseed an empty cluster with the point farthest from its centroid.
                std::size_t farthest = 0;
                double farthest_d2 = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double d2 = squared_distance(rows[i], centroids[assignments[i]]);
                    if (d2 > farthest_d2) {
                        farthest_d2 = d2;
                        farthest = i;
                    }
                }
                next[c] = rows[farthest];
                assignments[farthest] = c;
                changed = true;
            } else {
                for (std::size_t j = 0; j < f; ++j)
                    next[c][j] /= static_cast<double>(counts[c]);
            }
        }
        centroids = std::move(next);
        if (!changed && iteration > 0) break;
    }

    KMeansResult result;
    result.within_ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        result.within_ss += squared_distance(rows[i], centroids[assignments[i]]);
    result.assignments = std::move(assignments);
    result.centroids = std::move(centroids);
    return result;
}

}  // namespace

double silhouette_score(const std::vector<std::vector<double>>& points,
                        const std::vector<std::size_t>& assignments) {
    if (points.size() != assignments.size())
        throw InsufficientDataError("silhouette over mismatched points and assignments");
    std::size_t n = points.size();
    if (n == 0) throw InsufficientDataError("silhouette of an empty sample");

    std::size_t k = 0;
    for (std::size_t c : assignments) k = std::max(k, c + 1);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t c : assignments) ++sizes[c];
    std::size_t nonempty = 0;
    for (std::size_t s : sizes)
        if (s > 0) ++nonempty;
    if (nonempty < 2) throw InsufficientDataError("silhouette needs at least 2 clusters");

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t own = assignments[i];
        if (sizes[own] == 1) continue;  // singleton contributes 0
        std::vector<double> dist_sum(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dist_sum[assignments[j]] += std::sqrt(squared_distance(points[i], points[j]));
        }
        double a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
        }
        double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

ClusterModel cluster_samples(const std::vector<std::vector<double>>& rows,
                             const std::vector<std::string>& properties, std::size_t k_min,
                             std::size_t k_max) {
    std::size_t n = rows.size();
    if (n < 3) throw InsufficientDataError("clustering needs at least 3 samples, got " +
                                           std::to_string(n));
    std::size_t f = rows[0].size();
    for (const auto& row : rows)
        if (row.size() != f) throw InsufficientDataError("clustering rows have uneven widths");

    // z-score per feature; a zero-variance feature among varying ones is inert
    std::vector<double> mean(f, 0.0), stddev(f, 0.0);
    for (std::size_t j = 0; j < f; ++j) {
        std::vector<double> column(n);
        for (std::size_t i = 0; i < n; ++i) column[i] = rows[i][j];
        mean[j] = stats::mean(column);
        stddev[j] = stats::sample_stddev(column);
    }
    bool any_varying = false;
    for (std::size_t j = 0; j < f; ++j)
        if (stddev[j] > 0.0) any_varying = true;
    if (!any_varying)
        throw DegenerateDataError("all samples are identical in feature space");

    std::vector<std::vector<double>> scaled(n, std::vector<double>(f, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j)
            scaled[i][j] = stddev[j] > 0.0 ? (rows[i][j] - mean[j]) / stddev[j] : 0.0;

    if (k_min == 0) k_min = 2;
    if (k_max == 0) k_max = std::min<std::size_t>(10, n - 1);
    if (k_min < 2) throw ConfigurationError("cluster count must be at least 2");
    k_max = std::min(k_max, n - 1);
    if (k_max < k_min)
        throw ConfigurationError("cluster range [" + std::to_string(k_min) + ", " +
                                 std::to_string(k_max) + "] is empty for " + std::to_string(n) +
                                 " samples");

    ClusterModel best;
    best.silhouette = -std::numeric_limits<double>::infinity();
    for (std::size_t k = k_min; k <= k_max; ++k) {
        KMeansResult best_run;
        for (std::uint64_t restart = 0; restart < 10; ++restart) {
            std::mt19937_64 rng(0x5eedULL + 1000003ULL * k + restart);
            KMeansResult run = kmeans_once(scaled, k, rng);
            if (run.within_ss < best_run.within_ss) best_run = std::move(run);
        }
        double score = silhouette_score(scaled, best_run.assignments);
        if (score > best.silhouette) {
            best.k = k;
            best.assignments = std::move(best_run.assignments);
            best.centroids = std::move(best_run.centroids);
            best.silhouette = score;
        }
    }
    best.properties = properties;
    best.feature_mean = std::move(mean);
    best.feature_stddev = std::move(stddev);
    return best;
}

std::vector<std::size_t> representatives_by_clustering(const ClusterModel& model,
                                                       const std::vector<std::vector<double>>& rows,
                                                       const std::vector<std::string>& ids) {
    if (rows.size() != model.assignments.size() || ids.size() != rows.size())
        throw ConfigurationError("cluster model does not match the sample rows");
    std::size_t f = model.feature_mean.size();
    std::vector<std::size_t> representatives;
    for (std::size_t c = 0; c < model.k; ++c) {
        std::optional<std::size_t> best;
        double best_d2 = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (model.assignments[i] != c) continue;
            std::vector<double> scaled(f);
            for (std::size_t j = 0; j < f; ++j)
                scaled[j] = model.feature_stddev[j] > 0.0
                                ? (rows[i][j] - model.feature_mean[j]) / model.feature_stddev[j]
                                : 0.0;
            double d2 = squared_distance(scaled, model.centroids[c]);
            if (!best || d2 < best_d2 || (d2 == best_d2 && ids[i] < ids[*best])) {
                best = i;
                best_d2 = d2;
            }
        }
        if (best) representatives.push_back(*best);
    }
    return representatives;
}

std::vector<std::size_t> representatives_by_rank(std::size_t n_ranked, SelectionMethod method,
                                                 std::size_t count) {
    if (method == SelectionMethod::top5) count = 5;
    if (count < 1) throw ConfigurationError("at least one representative is required");
    if (method == SelectionMethod::top5 && n_ranked < count)
        throw InsufficientDataError("cannot pick " + std::to_string(count) +
                                    " representatives from " + std::to_string(n_ranked) +
                                    " samples");
    if (count > n_ranked) count = n_ranked;
    std::vector<std::size_t> positions;
    if (method == SelectionMethod::top5) {
        for (std::size_t i = 0; i < 5; ++i) positions.push_back(i);
        return positions;
    }
    if (count == 1) {
        positions.push_back(0);
        return positions;
    }
    for (std::size_t i = 0; i < count; ++i) {
        double exact = static_cast<double>(i) * static_cast<double>(n_ranked - 1) /
                       static_cast<double>(count - 1);
        positions.push_back(static_cast<std::size_t>(std::llround(exact)));
    }
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    return positions;
}

TransferDecision evaluate_transfer_criteria(const stats::LinearFit& fit) {
    TransferDecision decision;
    decision.r = fit.r;
    decision.p = fit.p;
    decision.n = fit.n;
    decision.transfer = fit.r > 0.7 && fit.p < 0.01;
    return decision;
}

namespace {

void require_identical_actions(const ActionSpace& source, const ActionSpace& target) {
    auto mismatch = [](const std::string& detail) {
        throw ConfigurationError("source and target action spaces differ: " + detail +
                                 " (only configuration-space changes are supported)");
    };
    if (source.experiments.size() != target.experiments.size())
        mismatch("experiment counts differ");
    for (const auto& exp : source.experiments) {
        const Experiment* other = target.find(exp.name);
        if (other == nullptr) mismatch("experiment '" + exp.name + "' is missing from the target");
        if (other->measured_properties != exp.measured_properties)
            mismatch("experiment '" + exp.name + "' measures different properties");
        if (assignments_to_json(other->parameters) != assignments_to_json(exp.parameters))
            mismatch("experiment '" + exp.name + "' has different parameters");
    }
}

struct SourcePoint {
    std::string entity_id;
    Configuration configuration;
    double value = 0.0;
};

Value coerce_to_kind(const Value& v, DimensionKind kind) {
    if (kind == DimensionKind::discrete_numeric && std::holds_alternative<std::string>(v)) {
        try {
            std::size_t pos = 0;
            double parsed = std::stod(std::get<std::string>(v), &pos);
            if (pos == std::get<std::string>(v).size()) return parsed;
        } catch (const std::exception&) {
        }
        return v;
    }
    if (kind == DimensionKind::categorical && std::holds_alternative<double>(v))
        return value_text(v);
    return v;
}

// Mapping values arrive from YAML with heuristic typing; align them with the
// dimension kinds on each side.
ValueMapping normalize_mapping(const ValueMapping& mapping, const ProbabilitySpace& source,
                               const ProbabilitySpace& target) {
    ValueMapping out;
    for (const auto& [name, pairs] : mapping.dimensions) {
        const Dimension* source_dim = source.find(name);
        const Dimension* target_dim = target.find(name);
        auto& normalized = out.dimensions[name];
        for (const auto& [from, to] : pairs) {
            normalized.emplace_back(
                source_dim != nullptr ? coerce_to_kind(from, source_dim->kind) : from,
                target_dim != nullptr ? coerce_to_kind(to, target_dim->kind) : to);
        }
    }
    return out;
}

// Ground truth over a target space: ok rows of an exhaustive characterization
// table, keyed by entity id.
std::map<std::string, double> load_ground_truth(const std::string& csv_path,
                                                const ProbabilitySpace& space,
                                                const std::string& property) {
    TabularWorkload table(csv_path);
    Experiment probe;
    probe.name = "ground-truth";
    probe.actuator_kind = "tabular";
    probe.measured_properties = {property};
    std::map<std::string, double> truth;
    for (const auto& config : enumerate(space)) {
        MeasurementResult result = table.measure(probe, config);
        if (result.status != "ok") continue;
        truth[canonical_id(config)] = result.property_values.at(property).value;
    }
    return truth;
}

}  // namespace

TransferReport run_rssc(std::shared_ptr<SampleStore> store,
                        std::shared_ptr<ActuatorRegistry> registry, const TransferJob& job) {
    DiscoverySpace source = DiscoverySpace::open(store, registry, job.source_space_id);
    DiscoverySpace target = DiscoverySpace::open(store, registry, job.target_space_id);
    require_identical_actions(source.actions(), target.actions());
    ValueMapping mapping = normalize_mapping(job.mapping, source.space(), target.space());
    mapping.validate();

    bool property_measured = false;
    for (const auto& exp : source.actions().experiments)
        for (const auto& prop : exp.measured_properties)
            if (prop == job.property) property_measured = true;
    if (!property_measured)
        throw ConfigurationError("property '" + job.property +
                                 "' is not measured by the action space");

    std::string operation_id = job.operation_id.empty()
                                   ? "rssc-" + job.source_space_id + "-" + job.target_space_id
                                   : job.operation_id;

    // The source's own samples with an ok value for the transfer property,
    // first occurrence per entity.
    std::vector<SourcePoint> points;
    std::set<std::string> seen;
    for (const Sample& sample : source.read()) {
        if (!seen.insert(sample.entity_id).second) continue;
        auto it = sample.property_values.find(job.property);
        if (it == sample.property_values.end() || it->second.status != "ok") continue;
        points.push_back({sample.entity_id, sample.configuration, it->second.value});
    }
    if (points.size() < 3)
        throw InsufficientDataError("source space has " + std::to_string(points.size()) +
                                    " usable samples; representative selection needs at least 3");

    TransferReport report;
    report.source_space_id = job.source_space_id;
    report.target_space_id = job.target_space_id;
    report.property = job.property;

    std::vector<std::size_t> representative_indices;
    if (job.selection == SelectionMethod::clustering) {
        std::vector<std::vector<double>> rows;
        std::vector<std::string> ids;
        for (const auto& point : points) {
            rows.push_back({point.value});
            ids.push_back(point.entity_id);
        }
        ClusterModel model = cluster_samples(rows, {job.property}, job.k_min, job.k_max);
        representative_indices = representatives_by_clustering(model, rows, ids);
        report.cluster = std::move(model);
    } else {
        std::vector<std::size_t> ranked(points.size());
        for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i] = i;
        bool minimize = job.direction == Objective::Direction::minimize;
        std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
            if (points[a].value != points[b].value)
                return minimize ? points[a].value < points[b].value
                                : points[a].value > points[b].value;
            return points[a].entity_id < points[b].entity_id;
        });
        for (std::size_t position :
             representatives_by_rank(points.size(), job.selection, job.linspace_count))
            representative_indices.push_back(ranked[position]);
    }

    // Translate the representatives and sample them in the target.
    std::vector<double> xs, ys;
    std::set<std::string> representative_target_ids;
    for (std::size_t index : representative_indices) {
        const SourcePoint& point = points[index];
        RepresentativePair pair;
        pair.source_entity_id = point.entity_id;
        pair.source_configuration = point.configuration;
        pair.source_value = point.value;
        pair.target_configuration = map_configuration(point.configuration, mapping);
        pair.target_entity_id = canonical_id(pair.target_configuration);
        representative_target_ids.insert(pair.target_entity_id);

        Sample sampled = target.sample(pair.target_configuration, operation_id);
        if (sampled.origin == "measured") ++report.target_new_measurements;
        pair.target_origin = sampled.origin;
        auto it = sampled.property_values.find(job.property);
        if (it != sampled.property_values.end() && it->second.status == "ok") {
            pair.target_value = it->second.value;
            pair.target_status = "ok";
            xs.push_back(point.value);
            ys.push_back(*pair.target_value);
        } else {
            pair.target_status = "failed";
        }
        report.representatives.push_back(std::move(pair));
    }

    report.fit = stats::linear_fit(xs, ys);
    report.decision = evaluate_transfer_criteria(report.fit);
    if (!report.decision.transfer) return report;

    SurrogateModel surrogate;
    surrogate.slope = report.fit.slope;
    surrogate.intercept = report.fit.intercept;
    surrogate.source_property = job.property;
    surrogate.fit = report.fit;
    report.surrogate = surrogate;
    report.percent_savings =
        percent_savings(report.target_new_measurements,
                        static_cast<std::uint64_t>(cardinality(target.space())));

    // The predictor experiment extends the target's action space into
    // a new space holding predictions for every point with a source value.
    std::string predicted_property = "predicted-" + job.property;
    Experiment predictor;
    predictor.name = job.property + "-predictor";
    predictor.actuator_kind = "surrogate";
    predictor.actuator_settings = {{"slope", surrogate.slope},
                                   {"intercept", surrogate.intercept},
                                   {"source_property", job.property},
                                   {"predicted_property", predicted_property}};
    predictor.measured_properties = {predicted_property};

    ActionSpace pred_actions = target.actions();
    pred_actions.experiments.push_back(predictor);
    report.pred_space_id = job.target_space_id + "-pred";

    nlohmann::json pred_definition = space_definition_to_json(
        report.pred_space_id, target.space(), pred_actions, ReusePolicy::reuse_only);
    if (auto existing = store->get_space_definition(report.pred_space_id)) {
        if (*existing != pred_definition)
            throw ConfigurationError("space '" + report.pred_space_id +
                                     "' already exists with a different definition");
    } else {
        DiscoverySpace::create(store, registry, report.pred_space_id, target.space(), pred_actions,
                               ReusePolicy::reuse_only);
    }
    DiscoverySpace pred_space = DiscoverySpace::open(store, registry, report.pred_space_id);

    std::map<std::string, double> source_value_by_entity;
    for (const auto& point : points) source_value_by_entity[point.entity_id] = point.value;
    ValueMapping inverse = mapping.inverse();

    for (const auto& target_config : enumerate(target.space())) {
        std::string target_id = canonical_id(target_config);
        if (representative_target_ids.count(target_id) > 0) continue;
        Configuration source_config;
        try {
            source_config = map_configuration(target_config, inverse);
        } catch (const MappingError&) {
            continue;  // outside the image of the mapping
        }
        auto source_value = source_value_by_entity.find(canonical_id(source_config));
        if (source_value == source_value_by_entity.end()) continue;

        MeasurementResult prediction;
        prediction.experiment_name = predictor.name;
        prediction.measured_at = utc_now_ns();
        PropertyValue pv;
        pv.value = surrogate.predict(source_value->second);
        prediction.property_values[predicted_property] = pv;
        pred_space.add_predicted(target_config, prediction, operation_id);
        report.predictions.push_back({target_id, target_config, pv.value});
    }

    if (job.ground_truth_csv) {
        std::map<std::string, double> truth =
            load_ground_truth(*job.ground_truth_csv, target.space(), job.property);

        // The model's view of every point it can speak about: surrogate
        // predictions plus the fitted values on the representatives.
        std::map<std::string, double> model_view;
        for (const auto& prediction : report.predictions)
            model_view[prediction.entity_id] = prediction.value;
        for (const auto& pair : report.representatives)
            model_view[pair.target_entity_id] = surrogate.predict(pair.source_value);

        std::vector<std::pair<std::string, double>> common_predicted, common_true;
        for (const auto& [id, predicted] : model_view) {
            auto t = truth.find(id);
            if (t == truth.end()) continue;
            common_predicted.emplace_back(id, predicted);
            common_true.emplace_back(id, t->second);
        }
        if (common_predicted.size() >= 2 && !truth.empty()) {
            bool minimize = job.direction == Objective::Direction::minimize;
            auto rank_ids = [&](const std::vector<std::pair<std::string, double>>& scored) {
                std::vector<std::pair<std::string, double>> sorted = scored;
                std::sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
                    if (a.second != b.second)
                        return minimize ? a.second < b.second : a.second > b.second;
                    return a.first < b.first;
                });
                std::vector<std::string> ids;
                for (const auto& [id, value] : sorted) {
                    (void)value;
                    ids.push_back(id);
                }
                return ids;
            };

            std::vector<double> truth_values;
            for (const auto& [id, value] : truth) {
                (void)id;
                truth_values.push_back(value);
            }
            SpaceCDF cdf = SpaceCDF::from_values(truth_values, job.direction);

            std::vector<std::string> predicted_ranking = rank_ids(common_predicted);
            std::vector<std::string> true_ranking = rank_ids(common_true);

            QualityMetrics quality;
            quality.best_percent = best_percentile(truth.at(predicted_ranking.front()), cdf);
            quality.top5_percent = common_predicted.size() >= 5
                                       ? top5_overlap(predicted_ranking, true_ranking)
                                       : 0.0;
            std::vector<double> predicted_values, true_values;
            for (std::size_t i = 0; i < common_predicted.size(); ++i) {
                predicted_values.push_back(common_predicted[i].second);
                true_values.push_back(common_true[i].second);
            }
            quality.rank_resolution = rank_resolution(predicted_values, true_values);
            report.quality = quality;
        }
    }
    return report;
}

nlohmann::json transfer_report_to_json(const TransferReport& report) {
    nlohmann::json j;
    j["schema_version"] = "dspace-transfer-report/1";
    j["source_space"] = report.source_space_id;
    j["target_space"] = report.target_space_id;
    j["property"] = report.property;
    j["decision"] = {{"r", report.decision.r},
                     {"p", report.decision.p},
                     {"transfer", report.decision.transfer},
                     {"n", report.decision.n}};
    j["fit"] = {{"slope", report.fit.slope},
                {"intercept", report.fit.intercept},
                {"r", report.fit.r},
                {"p", report.fit.p},
                {"n", report.fit.n}};
    if (report.surrogate) {
        j["surrogate"] = {{"slope", report.surrogate->slope},
                          {"intercept", report.surrogate->intercept},
                          {"source_property", report.surrogate->source_property}};
        j["pred_space"] = report.pred_space_id;
    } else {
        j["surrogate"] = nullptr;
    }
    if (report.cluster) {
        j["cluster"] = {{"k", report.cluster->k}, {"silhouette", report.cluster->silhouette}};
    }
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& pair : report.representatives) {
        nlohmann::json r;
        r["source_entity"] = pair.source_entity_id;
        r["source_configuration"] = assignments_to_json(pair.source_configuration.assignments);
        r["source_value"] = pair.source_value;
        r["target_entity"] = pair.target_entity_id;
        r["target_configuration"] = assignments_to_json(pair.target_configuration.assignments);
        if (pair.target_value)
            r["target_value"] = *pair.target_value;
        else
            r["target_value"] = nullptr;
        r["target_origin"] = pair.target_origin;
        r["target_status"] = pair.target_status;
        reps.push_back(std::move(r));
    }
    j["representatives"] = reps;
    j["prediction_count"] = report.predictions.size();
    j["target_new_measurements"] = report.target_new_measurements;
    if (report.quality) {
        j["quality"] = {{"best_percent", report.quality->best_percent},
                        {"top5_percent", report.quality->top5_percent},
                        {"rank_resolution", report.quality->rank_resolution}};
    } else {
        j["quality"] = nullptr;
    }
    if (report.percent_savings)
        j["percent_savings"] = *report.percent_savings;
    else
        j["percent_savings"] = nullptr;
    return j;
}

std::string predictions_csv(const TransferReport& report) {
    std::ostringstream out;
    if (report.predictions.empty()) return out.str();
    std::vector<std::string> dims;
    for (const auto& [name, value] : report.predictions.front().configuration.assignments) {
        (void)value;
        dims.push_back(name);
    }
    out << "entity_id";
    for (const auto& dim : dims) out << "," << dim;
    out << ",predicted_" << report.property << "\r\n";
    for (const auto& prediction : report.predictions) {
        out << prediction.entity_id;
        for (const auto& dim : dims)
            out << "," << value_text(prediction.configuration.assignments.at(dim));
        out << "," << value_text(Value(prediction.value)) << "\r\n";
    }
    return out.str();
}

}  // namespace dspace
