#include <algorithm>
#include <thread>

#include "doctest.h"

#include "dspace/json_util.hpp"
#include "dspace/store.hpp"
#include "test_util.hpp"

using namespace dspace;
using testutil::config_of;
using testutil::TempDir;

namespace {

MeasurementResult ok_result(const std::string& experiment, const std::string& property,
                            double value) {
    MeasurementResult result;
    result.experiment_name = experiment;
    result.property_values[property] = PropertyValue{value, "ms", "ok"};
    result.measured_at = utc_now_ns();
    result.status = "ok";
    return result;
}

}  // namespace

TEST_CASE("put and get round-trip") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));

    Configuration config = config_of({{"batch", Value(4.0)}, {"mode", Value(std::string("a"))}});
    std::string id = store.put_result(config, ok_result("bench", "latency", 41.0));
    CHECK(id == canonical_id(config));

    auto entity = store.get_by_id(id);
    REQUIRE(entity.has_value());
    CHECK(entity->entity_id == id);
    CHECK(entity->assignments == config);
    REQUIRE(entity->results.size() == 1);
    CHECK(entity->results[0].experiment_name == "bench");
    CHECK(entity->results[0].property_values.at("latency").value == doctest::Approx(41.0));
    CHECK(entity->results[0].property_values.at("latency").unit == "ms");
    CHECK(entity->results[0].status == "ok");

    CHECK_FALSE(store.get_by_id("no-such-id").has_value());
    CHECK(store.entity_count() == 1);
}

TEST_CASE("single-measurement policy") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));
    Configuration config = config_of({{"x", Value(1.0)}});

    store.put_result(config, ok_result("bench", "latency", 1.0));
    CHECK_THROWS_AS(store.put_result(config, ok_result("bench", "latency", 2.0)), PolicyViolation);

    SUBCASE("different parameters are a different measurement") {
        MeasurementResult other = ok_result("bench", "latency", 2.0);
        other.experiment_parameters["reps"] = Value(3.0);
        CHECK_NOTHROW(store.put_result(config, other));
        CHECK(store.get_by_id(canonical_id(config))->results.size() == 2);
    }
    SUBCASE("a different experiment is allowed") {
        CHECK_NOTHROW(store.put_result(config, ok_result("power", "watts", 2.0)));
    }
}

TEST_CASE("multi-measurement policy allows repeats") {
    TempDir dir;
    SampleStore store(dir.file("store.db"), MeasurementPolicy::multi);
    Configuration config = config_of({{"x", Value(1.0)}});
    store.put_result(config, ok_result("bench", "latency", 1.0));
    store.put_result(config, ok_result("bench", "latency", 2.0));
    CHECK(store.get_by_id(canonical_id(config))->results.size() == 2);
}

TEST_CASE("result validation") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));
    Configuration config = config_of({{"x", Value(1.0)}});

    SUBCASE("ok results need finite values") {
        MeasurementResult bad = ok_result("bench", "latency", std::nan(""));
        CHECK_THROWS_AS(store.put_result(config, bad), Error);
    }
    SUBCASE("failed results need a reason") {
        MeasurementResult failed;
        failed.experiment_name = "bench";
        failed.status = "failed";
        CHECK_THROWS_AS(store.put_result(config, failed), Error);
        failed.failure_reason = "timeout";
        CHECK_NOTHROW(store.put_result(config, failed));
    }
    SUBCASE("unknown status rejected") {
        MeasurementResult bad = ok_result("bench", "latency", 1.0);
        bad.status = "maybe";
        CHECK_THROWS_AS(store.put_result(config, bad), Error);
    }
    SUBCASE("conflicting assignments for an existing entity id are impossible") {
        // Same entity key requires byte-identical assignments; different
        // assignments hash to a different id, so collisions cannot occur via
        // the public interface. Exercise the consistency check via repeats.
        store.put_result(config, ok_result("bench", "latency", 1.0));
        CHECK_NOTHROW(store.put_result(config, ok_result("power", "watts", 5.0)));
    }
}

TEST_CASE("match agrees with a linear-scan oracle") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));

    ProbabilitySpace space = testutil::small_space();
    ActionSpace actions;
    actions.experiments.push_back(testutil::tabular_experiment("unused.csv"));

    // Population: in-space entities with the right experiment, in-space with a
    // wrong experiment, in-space with wrong parameters, and out-of-space ones.
    std::vector<Configuration> in_space = enumerate(space);
    for (std::size_t i = 0; i < in_space.size(); ++i) {
        if (i % 3 == 0) {
            store.put_result(in_space[i], ok_result("bench", "latency", double(i)));
        } else if (i % 3 == 1) {
            store.put_result(in_space[i], ok_result("other", "throughput", double(i)));
        } else {
            MeasurementResult wrong_params = ok_result("bench", "latency", double(i));
            wrong_params.experiment_parameters["reps"] = Value(5.0);
            store.put_result(in_space[i], wrong_params);
        }
    }
    store.put_result(config_of({{"batch", Value(8.0)}, {"mode", Value(std::string("a"))}}),
                     ok_result("bench", "latency", 99.0));
    store.put_result(config_of({{"batch", Value(2.0)}}), ok_result("bench", "latency", 98.0));

    // Oracle route: scan everything, filter in plain C++.
    std::vector<std::string> expected;
    for (const auto& entity : store.all_entities()) {
        if (!contains(space, entity.assignments)) continue;
        bool any = false;
        for (const auto& result : entity.results)
            for (const auto& exp : actions.experiments)
                if (result.experiment_name == exp.name &&
                    result.experiment_parameters == exp.parameters)
                    any = true;
        if (any) expected.push_back(entity.entity_id);
    }
    std::sort(expected.begin(), expected.end());

    std::vector<std::string> actual;
    for (const auto& entity : store.match(space, actions)) actual.push_back(entity.entity_id);
    std::sort(actual.begin(), actual.end());

    CHECK(actual == expected);
    CHECK(actual.size() == 2);  // i in {0, 3}
}

TEST_CASE("export import round-trip") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));

    for (int i = 0; i < 20; ++i) {
        Configuration config = config_of({{"x", Value(double(i))}});
        store.put_result(config, ok_result("bench", "latency", 10.0 * i));
        if (i % 2 == 0) {
            MeasurementResult failed;
            failed.experiment_name = "power";
            failed.status = "failed";
            failed.failure_reason = "psu tripped";
            failed.measured_at = utc_now_ns();
            store.put_result(config, failed);
        }
    }

    std::string snapshot = dir.file("snapshot.jsonl");
    store.export_file(snapshot);
    std::string first_export = testutil::read_file(snapshot);
    CHECK(first_export.substr(0, 1) == "{");
    CHECK(first_export.find("dspace-store/1") != std::string::npos);

    SampleStore copy(dir.file("copy.db"));
    copy.import_file(snapshot);
    CHECK(copy.entity_count() == store.entity_count());

    auto original = store.all_entities();
    auto restored = copy.all_entities();
    REQUIRE(original.size() == restored.size());
    for (std::size_t i = 0; i < original.size(); ++i)
        CHECK(entities_equal(original[i], restored[i]));

    // Re-export from the copy must be byte-identical.
    std::string second = dir.file("snapshot2.jsonl");
    copy.export_file(second);
    CHECK(testutil::read_file(second) == first_export);
}

TEST_CASE("empty export is an empty file") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));
    std::string snapshot = dir.file("empty.jsonl");
    store.export_file(snapshot);
    CHECK(testutil::read_file(snapshot).empty());

    SampleStore copy(dir.file("copy.db"));
    copy.import_file(snapshot);
    CHECK(copy.entity_count() == 0);
}

TEST_CASE("import rejects malformed input atomically") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));
    store.put_result(config_of({{"x", Value(1.0)}}), ok_result("bench", "latency", 1.0));
    std::string snapshot = dir.file("snapshot.jsonl");
    store.export_file(snapshot);

    SUBCASE("missing header") {
        std::string content = testutil::read_file(snapshot);
        std::size_t nl = content.find('\n');
        testutil::write_file(snapshot, content.substr(nl + 1));
        SampleStore copy(dir.file("copy.db"));
        CHECK_THROWS_AS(copy.import_file(snapshot), ImportError);
        CHECK(copy.entity_count() == 0);
    }
    SUBCASE("garbage line aborts with its line number") {
        testutil::write_file(snapshot, testutil::read_file(snapshot) + "not json\n");
        SampleStore copy(dir.file("copy.db"));
        try {
            copy.import_file(snapshot);
            FAIL("expected ImportError");
        } catch (const ImportError& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
        CHECK(copy.entity_count() == 0);
    }
    SUBCASE("tampered entity id is detected") {
        std::string content = testutil::read_file(snapshot);
        std::size_t nl = content.find('\n');
        nlohmann::json entity = nlohmann::json::parse(content.substr(nl + 1));
        entity["entity_id"] = std::string(64, 'f');
        testutil::write_file(snapshot, content.substr(0, nl + 1) + entity.dump() + "\n");
        SampleStore copy(dir.file("copy.db"));
        CHECK_THROWS_AS(copy.import_file(snapshot), ImportError);
        CHECK(copy.entity_count() == 0);
    }
}

TEST_CASE("entity json is canonical and round-trips") {
    StoredEntity entity;
    entity.assignments = config_of({{"b", Value(2.0)}, {"a", Value(std::string("x"))}});
    entity.entity_id = canonical_id(entity.assignments);
    entity.created_at = 1234567890123456789;
    MeasurementResult result = ok_result("bench", "latency", 4.0);
    result.measured_at = 1234567890123456790;
    entity.results.push_back(result);

    nlohmann::json j = entity_to_json(entity);
    std::string dumped = j.dump();
    // Keys serialize sorted; "assignments" precedes "created_at" precedes
    // "entity_id" precedes "results".
    CHECK(dumped.find("\"assignments\"") < dumped.find("\"created_at\""));
    CHECK(dumped.find("\"created_at\"") < dumped.find("\"entity_id\""));
    CHECK(dumped.find("\"entity_id\"") < dumped.find("\"results\""));

    StoredEntity back = entity_from_json(j);
    CHECK(entities_equal(entity, back));
    CHECK(entity_to_json(back).dump() == dumped);
}

TEST_CASE("space definitions") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));
    nlohmann::json definition = {{"schema_version", "dspace-space/1"}, {"space_id", "s1"}};
    store.put_space_definition("s1", definition);
    CHECK_THROWS_AS(store.put_space_definition("s1", definition), ConfigurationError);

    auto fetched = store.get_space_definition("s1");
    REQUIRE(fetched.has_value());
    CHECK(*fetched == definition);
    CHECK_FALSE(store.get_space_definition("nope").has_value());

    store.put_space_definition("a0", definition);
    CHECK(store.list_spaces() == std::vector<std::string>{"a0", "s1"});
}

TEST_CASE("sampling records") {
    TempDir dir;
    SampleStore store(dir.file("store.db"));

    CHECK(store.next_seq("s1", "op1") == 0);
    for (int i = 0; i < 3; ++i) {
        RecordEntry entry;
        entry.operation_id = "op1";
        entry.seq = store.next_seq("s1", "op1");
        entry.entity_id = "e" + std::to_string(i);
        entry.origin = i == 0 ? "measured" : "reused";
        entry.timestamp = utc_now_ns();
        store.append_record("s1", entry);
    }
    RecordEntry other;
    other.operation_id = "op2";
    other.seq = store.next_seq("s1", "op2");
    other.entity_id = "e9";
    other.origin = "predicted";
    other.timestamp = utc_now_ns();
    store.append_record("s1", other);

    auto entries = store.read_record("s1");
    REQUIRE(entries.size() == 4);
    CHECK(entries[0].seq == 0);
    CHECK(entries[1].seq == 1);
    CHECK(entries[2].seq == 2);
    CHECK(entries[3].operation_id == "op2");
    CHECK(entries[3].seq == 0);
    CHECK(store.next_seq("s1", "op1") == 3);
    CHECK(store.read_record("other-space").empty());
}

TEST_CASE("two handles and two threads share one file") {
    TempDir dir;
    std::string path = dir.file("store.db");
    SampleStore a(path);
    SampleStore b(path);

    auto writer = [](SampleStore& store, int base) {
        for (int i = 0; i < 25; ++i) {
            Configuration config =
                config_of({{"x", Value(double(base + i))}, {"who", Value(double(base))}});
            store.put_result(config, ok_result("bench", "latency", double(i)));
        }
    };
    std::thread t1(writer, std::ref(a), 1000);
    std::thread t2(writer, std::ref(b), 2000);
    t1.join();
    t2.join();

    SampleStore check(path);
    CHECK(check.entity_count() == 50);
}
