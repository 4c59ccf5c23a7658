#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dspace/space.hpp"

struct sqlite3;

namespace dspace {

// One measured property: numeric value, optional unit, per-property status.
struct PropertyValue {
    double value = 0.0;
    std::string unit;
    std::string status = "ok";
};

// The outcome of running one experiment against one configuration. A failed
// result carries a reason and still counts as measured for reuse purposes.
struct MeasurementResult {
    std::string experiment_name;
    std::map<std::string, Value> experiment_parameters;
    std::map<std::string, PropertyValue> property_values;
    std::int64_t measured_at = 0;  // UTC nanoseconds since epoch
    std::string status = "ok";     // ok | failed
    std::string failure_reason;
};

// A configuration at rest together with every result recorded for it.
struct StoredEntity {
    std::string entity_id;
    Configuration assignments;
    std::vector<MeasurementResult> results;
    std::int64_t created_at = 0;
};

// One line of a space's sampling record.
struct RecordEntry {
    std::string operation_id;
    std::int64_t seq = 0;
    std::string entity_id;
    std::string origin;  // measured | reused | predicted
    std::int64_t timestamp = 0;
};

enum class MeasurementPolicy { single, multi };

std::int64_t utc_now_ns();

// The shared sample store: a single-file embedded database holding entities,
// results, space definitions, and per-space sampling records. Safe for
// concurrent access from multiple handles, threads, and processes; one handle
// serializes its own calls internally.
class SampleStore {
public:
    explicit SampleStore(const std::string& path,
                         MeasurementPolicy policy = MeasurementPolicy::single);
    ~SampleStore();

    SampleStore(const SampleStore&) = delete;
    SampleStore& operator=(const SampleStore&) = delete;

    const std::string& path() const { return path_; }
    MeasurementPolicy policy() const { return policy_; }

    // Creates the entity if absent and appends the result in one durable
    // transaction. A repeat (experiment, parameters) write to the same entity
    // raises PolicyViolation under the single-measurement policy.
    std::string put_result(const Configuration& assignments, const MeasurementResult& result);

    std::optional<StoredEntity> get_by_id(const std::string& entity_id);

    // Entities whose assignments lie in the space and which hold at least one
    // result from an action-space experiment with matching parameters.
    std::vector<StoredEntity> match(const ProbabilitySpace& space, const ActionSpace& actions);

    // Every entity, ordered by entity_id.
    std::vector<StoredEntity> all_entities();

    std::uint64_t entity_count();

    // JSON-lines snapshot: schema header line, then one entity per line in
    // entity_id order with sorted keys. An empty store writes an empty file.
    void export_file(const std::string& file_path);

    // Reads a snapshot back, merging into this store inside one transaction.
    // A malformed line aborts with its line number and leaves the store
    // unchanged.
    void import_file(const std::string& file_path);

    void put_space_definition(const std::string& space_id, const nlohmann::json& definition);
    std::optional<nlohmann::json> get_space_definition(const std::string& space_id);
    std::vector<std::string> list_spaces();

    void append_record(const std::string& space_id, const RecordEntry& entry);
    std::vector<RecordEntry> read_record(const std::string& space_id);
    std::int64_t next_seq(const std::string& space_id, const std::string& operation_id);

private:
    struct Transaction;

    void exec(const std::string& sql);
    std::vector<MeasurementResult> results_for(const std::string& entity_id);
    void insert_result_locked(const std::string& entity_id, const MeasurementResult& result);
    std::string ensure_entity_locked(const Configuration& assignments, std::int64_t created_at);

    std::string path_;
    MeasurementPolicy policy_;
    sqlite3* db_ = nullptr;
    std::mutex mutex_;
};

nlohmann::json entity_to_json(const StoredEntity& entity);
StoredEntity entity_from_json(const nlohmann::json& j);
nlohmann::json result_to_json(const MeasurementResult& result);
MeasurementResult result_from_json(const nlohmann::json& j);

bool entities_equal(const StoredEntity& a, const StoredEntity& b);

}  // namespace dspace
