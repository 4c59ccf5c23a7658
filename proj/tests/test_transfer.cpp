#include <cmath>
#include <set>

#include "doctest.h"

#include "dspace/transfer.hpp"
#include "test_util.hpp"

using namespace dspace;
using testutil::config_of;
using testutil::TempDir;

namespace {

const std::vector<double> kBatches = {2, 4, 8, 16, 32, 64, 128};
const std::vector<double> kTargetBatches = {1, 3, 5, 7, 9, 11, 13};
const std::vector<double> kGpus = {2, 4};
const std::vector<double> kTokens = {512, 1024, 2048, 4096};

double source_latency(std::size_t bi, std::size_t gi, std::size_t ti) {
    return 20.0 + 1.5 * static_cast<double>(bi * 8 + gi * 4 + ti);
}

// 56-point characterization tables: the target space renames the batch axis
// and responds affinely (2x + 5) unless another response is requested.
std::string table_csv(const std::vector<double>& batches, double slope, double intercept) {
    std::string csv = "batch,gpus,tokens,latency,status\n";
    for (std::size_t bi = 0; bi < batches.size(); ++bi)
        for (std::size_t gi = 0; gi < kGpus.size(); ++gi)
            for (std::size_t ti = 0; ti < kTokens.size(); ++ti) {
                double value = slope * source_latency(bi, gi, ti) + intercept;
                csv += value_text(Value(batches[bi])) + "," + value_text(Value(kGpus[gi])) + "," +
                       value_text(Value(kTokens[ti])) + "," + value_text(Value(value)) + ",ok\n";
            }
    return csv;
}

ProbabilitySpace batch_space(const std::vector<double>& batches) {
    ProbabilitySpace space;
    Dimension batch{"batch", DimensionKind::discrete_numeric, {}, {}};
    for (double b : batches) batch.values.push_back(Value(b));
    Dimension gpus{"gpus", DimensionKind::discrete_numeric, {}, {}};
    for (double g : kGpus) gpus.values.push_back(Value(g));
    Dimension tokens{"tokens", DimensionKind::discrete_numeric, {}, {}};
    for (double t : kTokens) tokens.values.push_back(Value(t));
    space.dimensions = {batch, gpus, tokens};
    return space;
}

// Mapping provided as text on purpose: the document loader types plain YAML
// scalars heuristically, and the pipeline must align them with the dimension
// kinds.
ValueMapping batch_mapping_as_text() {
    ValueMapping mapping;
    for (std::size_t i = 0; i < kBatches.size(); ++i)
        mapping.dimensions["batch"].emplace_back(Value(value_text(Value(kBatches[i]))),
                                                 Value(value_text(Value(kTargetBatches[i]))));
    return mapping;
}

struct TransferFixture {
    TempDir dir;
    std::shared_ptr<SampleStore> store;
    std::shared_ptr<ActuatorRegistry> registry;
    std::string target_csv;

    explicit TransferFixture(double slope = 2.0, double intercept = 5.0) {
        std::string source_csv = dir.file("source.csv");
        target_csv = dir.file("target.csv");
        testutil::write_file(source_csv, table_csv(kBatches, 1.0, 0.0));
        testutil::write_file(target_csv, table_csv(kTargetBatches, slope, intercept));
        store = std::make_shared<SampleStore>(dir.file("store.db"));
        registry = ActuatorRegistry::with_builtins();

        ActionSpace source_actions, target_actions;
        source_actions.experiments.push_back(testutil::tabular_experiment(source_csv));
        target_actions.experiments.push_back(testutil::tabular_experiment(target_csv));

        DiscoverySpace source = DiscoverySpace::create(store, registry, "src",
                                                       batch_space(kBatches), source_actions);
        DiscoverySpace::create(store, registry, "tgt", batch_space(kTargetBatches), target_actions);
        for (const auto& config : enumerate(source.space())) source.sample(config, "seed-src");
    }

    // k floor of 3 keeps the representative count fit-worthy (n >= 3).
    TransferJob job() const {
        TransferJob j;
        j.source_space_id = "src";
        j.target_space_id = "tgt";
        j.mapping = batch_mapping_as_text();
        j.property = "latency";
        j.k_min = 3;
        j.k_max = 8;
        return j;
    }
};

}  // namespace

TEST_CASE("silhouette score") {
    SUBCASE("two tight far-apart pairs") {
        std::vector<std::vector<double>> points = {{0}, {0.01}, {10}, {10.01}};
        CHECK(silhouette_score(points, {0, 0, 1, 1}) ==
              doctest::Approx(0.9989999997499917).epsilon(1e-12));
    }
    SUBCASE("singletons contribute zero but count") {
        std::vector<std::vector<double>> points = {{0}, {1}, {10}};
        CHECK(silhouette_score(points, {0, 0, 1}) ==
              doctest::Approx(0.5962962962962962).epsilon(1e-12));
    }
    SUBCASE("fewer than two nonempty clusters") {
        std::vector<std::vector<double>> points = {{0}, {1}};
        CHECK_THROWS_AS(silhouette_score(points, {0, 0}), InsufficientDataError);
    }
}

TEST_CASE("cluster_samples picks k by silhouette") {
    // Three tight pairs; oracle silhouettes (scikit-learn, optimal k-means per
    // k): k=2 0.6588, k=3 0.9799, k=4 0.6532, k=5 0.3266.
    std::vector<std::vector<double>> rows = {{0}, {0.1}, {5}, {5.1}, {10}, {10.1}};
    ClusterModel model = cluster_samples(rows, {"latency"});
    CHECK(model.k == 3);
    CHECK(model.silhouette == doctest::Approx(0.9799313264659837).epsilon(1e-9));
    CHECK(model.assignments.size() == 6);
    CHECK(model.assignments[0] == model.assignments[1]);
    CHECK(model.assignments[2] == model.assignments[3]);
    CHECK(model.assignments[4] == model.assignments[5]);
    CHECK(model.assignments[0] != model.assignments[2]);
    CHECK(model.assignments[2] != model.assignments[4]);

    SUBCASE("a fixed k range is honored") {
        ClusterModel pinned = cluster_samples(rows, {"latency"}, 2, 2);
        CHECK(pinned.k == 2);
        CHECK(pinned.silhouette == doctest::Approx(0.658846770284219).epsilon(1e-9));
    }
    SUBCASE("zero-variance features are inert") {
        std::vector<std::vector<double>> padded;
        for (const auto& row : rows) padded.push_back({row[0], 7.0});
        ClusterModel with_constant = cluster_samples(padded, {"latency", "watts"});
        CHECK(with_constant.k == 3);
        CHECK(with_constant.assignments == model.assignments);
    }
    SUBCASE("degenerate inputs") {
        CHECK_THROWS_AS(cluster_samples({{1}, {2}}, {"latency"}), InsufficientDataError);
        CHECK_THROWS_AS(cluster_samples({{3}, {3}, {3}}, {"latency"}), DegenerateDataError);
        CHECK_THROWS_AS(cluster_samples(rows, {"latency"}, 5, 3), ConfigurationError);
    }
}

TEST_CASE("clustering representatives sit nearest their centroid") {
    std::vector<std::vector<double>> rows = {{0}, {0.1}, {5}, {5.1}, {10}, {10.1}};
    std::vector<std::string> ids = {"e0", "e1", "e2", "e3", "e4", "e5"};
    ClusterModel model = cluster_samples(rows, {"latency"});
    std::vector<std::size_t> reps = representatives_by_clustering(model, rows, ids);
    REQUIRE(reps.size() == 3);
    std::set<std::size_t> pair_of;
    for (std::size_t rep : reps) pair_of.insert(rep / 2);
    CHECK(pair_of == std::set<std::size_t>{0, 1, 2});

    SUBCASE("exact distance ties go to the smaller id") {
        ClusterModel tie;
        tie.k = 1;
        tie.assignments = {0, 0};
        tie.centroids = {{0.0}};
        tie.silhouette = 0.0;
        tie.properties = {"latency"};
        tie.feature_mean = {0.0};
        tie.feature_stddev = {1.0};
        std::vector<std::size_t> picked =
            representatives_by_clustering(tie, {{-1.0}, {1.0}}, {"zz", "aa"});
        REQUIRE(picked.size() == 1);
        CHECK(picked[0] == 1);  // "aa" < "zz"
    }
}

TEST_CASE("rank-based representative positions") {
    CHECK(representatives_by_rank(7, SelectionMethod::top5, 0) ==
          std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK_THROWS_AS(representatives_by_rank(4, SelectionMethod::top5, 0), InsufficientDataError);

    CHECK(representatives_by_rank(5, SelectionMethod::linspace, 3) ==
          std::vector<std::size_t>{0, 2, 4});
    CHECK(representatives_by_rank(5, SelectionMethod::linspace, 5) ==
          std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(representatives_by_rank(9, SelectionMethod::linspace, 5) ==
          std::vector<std::size_t>{0, 2, 4, 6, 8});
    CHECK(representatives_by_rank(10, SelectionMethod::linspace, 1) ==
          std::vector<std::size_t>{0});
    // Oversampling a short ranking dedupes to the distinct positions.
    CHECK(representatives_by_rank(3, SelectionMethod::linspace, 5).size() == 3);
}

TEST_CASE("transfer criteria decision table") {
    auto decide = [](double r, double p) {
        stats::LinearFit fit;
        fit.r = r;
        fit.p = p;
        fit.n = 8;
        return evaluate_transfer_criteria(fit).transfer;
    };
    CHECK(decide(0.99, 9e-7));
    CHECK(decide(1.0, 0.00014));
    CHECK_FALSE(decide(0.98, 0.017));
    CHECK_FALSE(decide(0.29, 0.19));
    CHECK_FALSE(decide(0.72, 0.17));
    CHECK_FALSE(decide(-0.025, 0.97));
    SUBCASE("boundaries are strict") {
        CHECK_FALSE(decide(0.7, 0.001));
        CHECK_FALSE(decide(0.9, 0.01));
        CHECK(decide(0.700001, 0.009999));
    }
}

TEST_CASE("rssc transfers an exact affine pair") {
    TransferFixture f;
    TransferJob job = f.job();
    job.ground_truth_csv = f.target_csv;
    TransferReport report = run_rssc(f.store, f.registry, job);

    CHECK(report.decision.transfer);
    CHECK(report.decision.r == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.decision.p == doctest::Approx(0.0));
    REQUIRE(report.surrogate.has_value());
    CHECK(report.surrogate->slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(report.surrogate->intercept == doctest::Approx(5.0).epsilon(1e-6));

    REQUIRE(report.cluster.has_value());
    std::size_t reps = report.representatives.size();
    CHECK(reps == report.cluster->k);
    CHECK(reps >= 3);
    CHECK(reps <= 8);
    CHECK(report.target_new_measurements == reps);
    CHECK(report.predictions.size() == 56 - reps);

    REQUIRE(report.percent_savings.has_value());
    CHECK(*report.percent_savings ==
          doctest::Approx((1.0 - double(reps) / 56.0) * 100.0).epsilon(1e-12));

    for (const auto& pair : report.representatives) {
        CHECK(pair.target_status == "ok");
        REQUIRE(pair.target_value.has_value());
        CHECK(*pair.target_value == doctest::Approx(2.0 * pair.source_value + 5.0).epsilon(1e-12));
        CHECK(value_text(pair.target_configuration.assignments.at("gpus")) ==
              value_text(pair.source_configuration.assignments.at("gpus")));
    }

    REQUIRE(report.quality.has_value());
    CHECK(report.quality->best_percent == doctest::Approx(100.0));
    CHECK(report.quality->top5_percent == doctest::Approx(100.0));
    CHECK(report.quality->rank_resolution == 1);

    CHECK(report.pred_space_id == "tgt-pred");
    DiscoverySpace pred = DiscoverySpace::open(f.store, f.registry, "tgt-pred");
    std::vector<Sample> predicted = pred.read();
    CHECK(predicted.size() == report.predictions.size());
    for (const auto& sample : predicted) {
        CHECK(sample.origin == "predicted");
        double got = sample.property_values.at("predicted-latency").value;
        // The batch mapping pairs axes by position, so the target indices
        // recover the analytic source latency directly.
        std::size_t bi = 0, gi = 0, ti = 0;
        for (std::size_t i = 0; i < kTargetBatches.size(); ++i)
            if (value_equal(sample.configuration.assignments.at("batch"), Value(kTargetBatches[i])))
                bi = i;
        for (std::size_t i = 0; i < kGpus.size(); ++i)
            if (value_equal(sample.configuration.assignments.at("gpus"), Value(kGpus[i]))) gi = i;
        for (std::size_t i = 0; i < kTokens.size(); ++i)
            if (value_equal(sample.configuration.assignments.at("tokens"), Value(kTokens[i]))) ti = i;
        CHECK(got == doctest::Approx(2.0 * source_latency(bi, gi, ti) + 5.0).epsilon(1e-9));
    }

    SUBCASE("a rerun reuses the target measurements and the predictor space") {
        TransferReport again = run_rssc(f.store, f.registry, job);
        CHECK(again.decision.transfer);
        CHECK(again.target_new_measurements == 0);
        REQUIRE(again.percent_savings.has_value());
        CHECK(*again.percent_savings == doctest::Approx(100.0));
    }
}

TEST_CASE("rssc declines a constant target") {
    TransferFixture f(0.0, 100.0);
    TransferJob job = f.job();
    job.k_min = 3;
    job.k_max = 6;
    TransferReport report = run_rssc(f.store, f.registry, job);

    CHECK_FALSE(report.decision.transfer);
    CHECK(report.decision.r == 0.0);
    CHECK(report.decision.p == 1.0);
    CHECK_FALSE(report.surrogate.has_value());
    CHECK_FALSE(report.quality.has_value());
    CHECK_FALSE(report.percent_savings.has_value());
    CHECK(report.predictions.empty());
    CHECK(report.target_new_measurements == report.representatives.size());
    CHECK_FALSE(f.store->get_space_definition("tgt-pred").has_value());
}

TEST_CASE("rssc top5 selection probes the best source points") {
    TransferFixture f;
    TransferJob job = f.job();
    job.selection = SelectionMethod::top5;
    TransferReport report = run_rssc(f.store, f.registry, job);

    REQUIRE(report.representatives.size() == 5);
    CHECK_FALSE(report.cluster.has_value());
    // Source latencies are 20 + 1.5*idx, so the best five are idx 0..4.
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(report.representatives[i].source_value ==
              doctest::Approx(20.0 + 1.5 * double(i)));
    CHECK(report.decision.transfer);
}

TEST_CASE("rssc rejects action-space changes") {
    TempDir dir;
    std::string csv = dir.file("table.csv");
    testutil::write_file(csv, table_csv(kBatches, 1.0, 0.0));
    auto store = std::make_shared<SampleStore>(dir.file("store.db"));
    auto registry = ActuatorRegistry::with_builtins();

    ActionSpace source_actions, target_actions;
    source_actions.experiments.push_back(testutil::tabular_experiment(csv));
    target_actions.experiments.push_back(testutil::tabular_experiment(csv, "bench2"));

    DiscoverySpace source =
        DiscoverySpace::create(store, registry, "src", batch_space(kBatches), source_actions);
    DiscoverySpace::create(store, registry, "tgt", batch_space(kBatches), target_actions);
    for (const auto& config : enumerate(source.space())) source.sample(config, "seed");

    TransferJob job;
    job.source_space_id = "src";
    job.target_space_id = "tgt";
    job.property = "latency";
    try {
        run_rssc(store, registry, job);
        FAIL("expected ConfigurationError");
    } catch (const ConfigurationError& e) {
        CHECK(std::string(e.what()).find("only configuration-space changes") != std::string::npos);
    }
}

TEST_CASE("rssc needs source samples") {
    TempDir dir;
    std::string csv = dir.file("table.csv");
    testutil::write_file(csv, table_csv(kBatches, 1.0, 0.0));
    auto store = std::make_shared<SampleStore>(dir.file("store.db"));
    auto registry = ActuatorRegistry::with_builtins();
    ActionSpace actions;
    actions.experiments.push_back(testutil::tabular_experiment(csv));
    DiscoverySpace::create(store, registry, "src", batch_space(kBatches), actions);
    DiscoverySpace::create(store, registry, "tgt", batch_space(kBatches), actions);

    TransferJob job;
    job.source_space_id = "src";
    job.target_space_id = "tgt";
    job.property = "latency";
    CHECK_THROWS_AS(run_rssc(store, registry, job), InsufficientDataError);
}

TEST_CASE("transfer report json shape") {
    TransferFixture f;
    TransferJob job = f.job();
    job.ground_truth_csv = f.target_csv;
    TransferReport report = run_rssc(f.store, f.registry, job);
    nlohmann::json j = transfer_report_to_json(report);
    CHECK(j.at("schema_version") == "dspace-transfer-report/1");
    CHECK(j.at("decision").at("transfer") == true);
    CHECK(j.at("pred_space") == "tgt-pred");
    CHECK(j.at("quality").at("rank_resolution") == 1);
    CHECK(j.at("representatives").size() == report.representatives.size());
    CHECK(j.at("prediction_count") == report.predictions.size());

    std::string csv = predictions_csv(report);
    CHECK(csv.substr(0, csv.find("\r\n")) == "entity_id,batch,gpus,tokens,predicted_latency");
    std::size_t lines = 0, pos = 0;
    while ((pos = csv.find("\r\n", pos)) != std::string::npos) {
        ++lines;
        pos += 2;
    }
    CHECK(lines == report.predictions.size() + 1);
}
