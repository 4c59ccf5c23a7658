#include "dspace/store.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <sqlite3.h>

#include "dspace/json_util.hpp"

namespace dspace {

nlohmann::json value_to_json(const Value& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    return std::get<double>(v);
}

Value value_from_json(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return j.get<double>();
    throw ConfigurationError("value must be a string or a number, got " + j.dump());
}

nlohmann::json assignments_to_json(const std::map<std::string, Value>& assignments) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, value] : assignments) j[name] = value_to_json(value);
    return j;
}

std::map<std::string, Value> assignments_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigurationError("assignments must be an object");
    std::map<std::string, Value> out;
    for (const auto& [name, value] : j.items()) out[name] = value_from_json(value);
    return out;
}

std::int64_t utc_now_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

namespace {

// Thin RAII wrapper over a prepared statement.
class Stmt {
public:
    Stmt(sqlite3* db, const std::string& sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK)
            throw StoreError("prepare failed: " + std::string(sqlite3_errmsg(db)) + " in " + sql);
    }
    ~Stmt() { sqlite3_finalize(stmt_); }

    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    Stmt& bind(int idx, const std::string& text) {
        check(sqlite3_bind_text(stmt_, idx, text.c_str(), -1, SQLITE_TRANSIENT));
        return *this;
    }
    Stmt& bind(int idx, std::int64_t value) {
        check(sqlite3_bind_int64(stmt_, idx, value));
        return *this;
    }
    Stmt& bind_null(int idx) {
        check(sqlite3_bind_null(stmt_, idx));
        return *this;
    }

    bool row() {
        int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw StoreError("step failed: " + std::string(sqlite3_errmsg(db_)));
    }

    void run() {
        if (row()) throw StoreError("statement unexpectedly returned rows");
    }

    std::string text(int idx) {
        const unsigned char* p = sqlite3_column_text(stmt_, idx);
        return p == nullptr ? std::string() : reinterpret_cast<const char*>(p);
    }
    std::int64_t integer(int idx) { return sqlite3_column_int64(stmt_, idx); }
    bool is_null(int idx) { return sqlite3_column_type(stmt_, idx) == SQLITE_NULL; }

private:
    void check(int rc) {
        if (rc != SQLITE_OK) throw StoreError("bind failed: " + std::string(sqlite3_errmsg(db_)));
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

void validate_result(const MeasurementResult& result) {
    if (result.experiment_name.empty())
        throw ConfigurationError("measurement result has an empty experiment name");
    if (result.status == "ok") {
        for (const auto& [prop, pv] : result.property_values)
            if (!std::isfinite(pv.value))
                throw ConfigurationError("ok result carries a non-finite value for property '" + prop + "'");
    } else if (result.status == "failed") {
        if (result.failure_reason.empty())
            throw ConfigurationError("failed result lacks a failure reason");
    } else {
        throw ConfigurationError("unknown result status '" + result.status + "'");
    }
}

}  // namespace

struct SampleStore::Transaction {
    explicit Transaction(SampleStore& store) : store_(store) {
        store_.exec("BEGIN IMMEDIATE");
        active_ = true;
    }
    void commit() {
        store_.exec("COMMIT");
        active_ = false;
    }
    ~Transaction() {
        if (active_) {
            try {
                store_.exec("ROLLBACK");
            } catch (...) {
            }
        }
    }

private:
    SampleStore& store_;
    bool active_ = false;
};

SampleStore::SampleStore(const std::string& path, MeasurementPolicy policy)
    : path_(path), policy_(policy) {
    int rc = sqlite3_open_v2(path.c_str(), &db_,
                             SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
    if (rc != SQLITE_OK) {
        std::string message = db_ != nullptr ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        db_ = nullptr;
        throw StoreError("cannot open store at '" + path + "': " + message);
    }
    sqlite3_busy_timeout(db_, 60000);
    exec("PRAGMA journal_mode=DELETE");
    exec("PRAGMA synchronous=FULL");
    exec(
        "CREATE TABLE IF NOT EXISTS entities ("
        " entity_id TEXT PRIMARY KEY,"
        " assignments TEXT NOT NULL,"
        " created_at INTEGER NOT NULL)");
    exec(
        "CREATE TABLE IF NOT EXISTS results ("
        " id INTEGER PRIMARY KEY AUTOINCREMENT,"
        " entity_id TEXT NOT NULL,"
        " experiment_name TEXT NOT NULL,"
        " experiment_parameters TEXT NOT NULL,"
        " property_values TEXT NOT NULL,"
        " status TEXT NOT NULL,"
        " failure_reason TEXT,"
        " measured_at INTEGER NOT NULL)");
    exec("CREATE INDEX IF NOT EXISTS idx_results_entity ON results(entity_id)");
    exec("CREATE INDEX IF NOT EXISTS idx_results_experiment ON results(experiment_name)");
    exec(
        "CREATE TABLE IF NOT EXISTS spaces ("
        " space_id TEXT PRIMARY KEY,"
        " definition TEXT NOT NULL)");
    exec(
        "CREATE TABLE IF NOT EXISTS sampling_records ("
        " id INTEGER PRIMARY KEY AUTOINCREMENT,"
        " space_id TEXT NOT NULL,"
        " operation_id TEXT NOT NULL,"
        " seq INTEGER NOT NULL,"
        " entity_id TEXT NOT NULL,"
        " origin TEXT NOT NULL,"
        " timestamp INTEGER NOT NULL,"
        " UNIQUE(space_id, operation_id, seq))");
    exec("CREATE INDEX IF NOT EXISTS idx_records_space ON sampling_records(space_id)");
}

SampleStore::~SampleStore() {
    sqlite3_close(db_);
}

void SampleStore::exec(const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string message = err != nullptr ? err : "unknown error";
        sqlite3_free(err);
        throw StoreError("exec failed: " + message + " in " + sql);
    }
}

std::string SampleStore::ensure_entity_locked(const Configuration& assignments,
                                              std::int64_t created_at) {
    std::string id = canonical_id(assignments);
    std::string assignments_text = assignments_to_json(assignments.assignments).dump();
    Stmt lookup(db_, "SELECT assignments FROM entities WHERE entity_id = ?1");
    lookup.bind(1, id);
    if (lookup.row()) {
        if (lookup.text(0) != assignments_text)
            throw IntegrityError("entity '" + id + "' exists with different assignments");
        return id;
    }
    Stmt insert(db_, "INSERT INTO entities(entity_id, assignments, created_at) VALUES(?1, ?2, ?3)");
    insert.bind(1, id).bind(2, assignments_text).bind(3, created_at);
    insert.run();
    return id;
}

void SampleStore::insert_result_locked(const std::string& entity_id,
                                       const MeasurementResult& result) {
    std::string params_text = assignments_to_json(result.experiment_parameters).dump();
    if (policy_ == MeasurementPolicy::single) {
        Stmt dup(db_,
                 "SELECT COUNT(*) FROM results"
                 " WHERE entity_id = ?1 AND experiment_name = ?2 AND experiment_parameters = ?3");
        dup.bind(1, entity_id).bind(2, result.experiment_name).bind(3, params_text);
        dup.row();
        if (dup.integer(0) > 0)
            throw PolicyViolation("entity '" + entity_id + "' already has a result for experiment '" +
                                  result.experiment_name + "' under the single-measurement policy");
    }
    nlohmann::json properties = nlohmann::json::object();
    for (const auto& [prop, pv] : result.property_values) {
        nlohmann::json entry;
        entry["status"] = pv.status;
        if (!pv.unit.empty()) entry["unit"] = pv.unit;
        entry["value"] = pv.value;
        properties[prop] = entry;
    }
    Stmt insert(db_,
                "INSERT INTO results(entity_id, experiment_name, experiment_parameters,"
                " property_values, status, failure_reason, measured_at)"
                " VALUES(?1, ?2, ?3, ?4, ?5, ?6, ?7)");
    insert.bind(1, entity_id)
        .bind(2, result.experiment_name)
        .bind(3, params_text)
        .bind(4, properties.dump())
        .bind(5, result.status);
    if (result.failure_reason.empty())
        insert.bind_null(6);
    else
        insert.bind(6, result.failure_reason);
    insert.bind(7, result.measured_at);
    insert.run();
}

std::string SampleStore::put_result(const Configuration& assignments,
                                    const MeasurementResult& result) {
    validate_result(result);
    std::lock_guard<std::mutex> lock(mutex_);
    Transaction txn(*this);
    std::string id = ensure_entity_locked(assignments, utc_now_ns());
    insert_result_locked(id, result);
    txn.commit();
    return id;
}

std::vector<MeasurementResult> SampleStore::results_for(const std::string& entity_id) {
    Stmt stmt(db_,
              "SELECT experiment_name, experiment_parameters, property_values, status,"
              " failure_reason, measured_at FROM results WHERE entity_id = ?1"
              " ORDER BY experiment_name, experiment_parameters, measured_at, id");
    stmt.bind(1, entity_id);
    std::vector<MeasurementResult> out;
    while (stmt.row()) {
        MeasurementResult result;
        result.experiment_name = stmt.text(0);
        result.experiment_parameters = assignments_from_json(nlohmann::json::parse(stmt.text(1)));
        nlohmann::json properties = nlohmann::json::parse(stmt.text(2));
        for (const auto& [prop, entry] : properties.items()) {
            PropertyValue pv;
            pv.value = entry.at("value").get<double>();
            pv.status = entry.at("status").get<std::string>();
            if (entry.contains("unit")) pv.unit = entry.at("unit").get<std::string>();
            result.property_values[prop] = pv;
        }
        result.status = stmt.text(3);
        if (!stmt.is_null(4)) result.failure_reason = stmt.text(4);
        result.measured_at = stmt.integer(5);
        out.push_back(std::move(result));
    }
    return out;
}

std::optional<StoredEntity> SampleStore::get_by_id(const std::string& entity_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    Stmt stmt(db_, "SELECT assignments, created_at FROM entities WHERE entity_id = ?1");
    stmt.bind(1, entity_id);
    if (!stmt.row()) return std::nullopt;
    StoredEntity entity;
    entity.entity_id = entity_id;
    entity.assignments.assignments = assignments_from_json(nlohmann::json::parse(stmt.text(0)));
    entity.created_at = stmt.integer(1);
    entity.results = results_for(entity_id);
    return entity;
}

std::vector<StoredEntity> SampleStore::match(const ProbabilitySpace& space,
                                             const ActionSpace& actions) {
    std::vector<StoredEntity> candidates;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (actions.experiments.empty()) return {};
        std::string sql = "SELECT DISTINCT entity_id FROM results WHERE experiment_name IN (";
        for (std::size_t i = 0; i < actions.experiments.size(); ++i) {
            if (i > 0) sql += ",";
            sql += "?" + std::to_string(i + 1);
        }
        sql += ") ORDER BY entity_id";
        Stmt stmt(db_, sql);
        for (std::size_t i = 0; i < actions.experiments.size(); ++i)
            stmt.bind(static_cast<int>(i + 1), actions.experiments[i].name);
        std::vector<std::string> ids;
        while (stmt.row()) ids.push_back(stmt.text(0));
        for (const auto& id : ids) {
            Stmt lookup(db_, "SELECT assignments, created_at FROM entities WHERE entity_id = ?1");
            lookup.bind(1, id);
            if (!lookup.row()) throw IntegrityError("result references missing entity '" + id + "'");
            StoredEntity entity;
            entity.entity_id = id;
            entity.assignments.assignments =
                assignments_from_json(nlohmann::json::parse(lookup.text(0)));
            entity.created_at = lookup.integer(1);
            entity.results = results_for(id);
            candidates.push_back(std::move(entity));
        }
    }
    std::vector<StoredEntity> out;
    for (auto& entity : candidates) {
        if (!contains(space, entity.assignments)) continue;
        bool provenance_ok = false;
        for (const auto& result : entity.results) {
            const Experiment* exp = actions.find(result.experiment_name);
            if (exp == nullptr) continue;
            if (assignments_to_json(result.experiment_parameters) ==
                assignments_to_json(exp->parameters)) {
                provenance_ok = true;
                break;
            }
        }
        if (provenance_ok) out.push_back(std::move(entity));
    }
    return out;
}

std::vector<StoredEntity> SampleStore::all_entities() {
    std::lock_guard<std::mutex> lock(mutex_);
    Stmt stmt(db_, "SELECT entity_id, assignments, created_at FROM entities ORDER BY entity_id");
    std::vector<StoredEntity> out;
    while (stmt.row()) {
        StoredEntity entity;
        entity.entity_id = stmt.text(0);
        entity.assignments.assignments = assignments_from_json(nlohmann::json::parse(stmt.text(1)));
        entity.created_at = stmt.integer(2);
        out.push_back(std::move(entity));
    }
    for (auto& entity : out) entity.results = results_for(entity.entity_id);
    return out;
}

std::uint64_t SampleStore::entity_count() {
    std::lock_guard<std::mutex> lock(mutex_);
    Stmt stmt(db_, "SELECT COUNT(*) FROM entities");
    stmt.row();
    return static_cast<std::uint64_t>(stmt.integer(0));
}

nlohmann::json result_to_json(const MeasurementResult& result) {
    nlohmann::json j;
    j["experiment_name"] = result.experiment_name;
    j["experiment_parameters"] = assignments_to_json(result.experiment_parameters);
    if (!result.failure_reason.empty()) j["failure_reason"] = result.failure_reason;
    j["measured_at"] = result.measured_at;
    nlohmann::json properties = nlohmann::json::object();
    for (const auto& [prop, pv] : result.property_values) {
        nlohmann::json entry;
        entry["status"] = pv.status;
        if (!pv.unit.empty()) entry["unit"] = pv.unit;
        entry["value"] = pv.value;
        properties[prop] = entry;
    }
    j["property_values"] = properties;
    j["status"] = result.status;
    return j;
}

MeasurementResult result_from_json(const nlohmann::json& j) {
    MeasurementResult result;
    result.experiment_name = j.at("experiment_name").get<std::string>();
    result.experiment_parameters = assignments_from_json(j.at("experiment_parameters"));
    if (j.contains("failure_reason")) result.failure_reason = j.at("failure_reason").get<std::string>();
    result.measured_at = j.at("measured_at").get<std::int64_t>();
    for (const auto& [prop, entry] : j.at("property_values").items()) {
        PropertyValue pv;
        pv.value = entry.at("value").get<double>();
        pv.status = entry.at("status").get<std::string>();
        if (entry.contains("unit")) pv.unit = entry.at("unit").get<std::string>();
        result.property_values[prop] = pv;
    }
    result.status = j.at("status").get<std::string>();
    return result;
}

nlohmann::json entity_to_json(const StoredEntity& entity) {
    nlohmann::json j;
    j["assignments"] = assignments_to_json(entity.assignments.assignments);
    j["created_at"] = entity.created_at;
    j["entity_id"] = entity.entity_id;
    nlohmann::json results = nlohmann::json::array();
    for (const auto& result : entity.results) results.push_back(result_to_json(result));
    j["results"] = results;
    return j;
}

StoredEntity entity_from_json(const nlohmann::json& j) {
    StoredEntity entity;
    entity.entity_id = j.at("entity_id").get<std::string>();
    entity.assignments.assignments = assignments_from_json(j.at("assignments"));
    entity.created_at = j.at("created_at").get<std::int64_t>();
    for (const auto& result : j.at("results")) entity.results.push_back(result_from_json(result));
    return entity;
}

bool entities_equal(const StoredEntity& a, const StoredEntity& b) {
    return entity_to_json(a) == entity_to_json(b);
}

void SampleStore::export_file(const std::string& file_path) {
    std::vector<StoredEntity> entities = all_entities();
    std::ofstream out(file_path, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write export file '" + file_path + "'");
    if (entities.empty()) return;
    out << "{\"schema\":\"dspace-store/1\"}\n";
    for (const auto& entity : entities) out << entity_to_json(entity).dump() << "\n";
    out.flush();
    if (!out) throw StoreError("write to export file '" + file_path + "' failed");
}

void SampleStore::import_file(const std::string& file_path) {
    std::ifstream in(file_path, std::ios::binary);
    if (!in) throw StoreError("cannot read import file '" + file_path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    if (lines.empty()) return;

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(lines[0]);
    } catch (const nlohmann::json::exception& e) {
        throw ImportError(1, e.what());
    }
    if (!header.is_object() || header.value("schema", "") != "dspace-store/1")
        throw ImportError(1, "missing schema header, expected {\"schema\":\"dspace-store/1\"}");

    std::vector<StoredEntity> entities;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        try {
            nlohmann::json j = nlohmann::json::parse(lines[i]);
            StoredEntity entity = entity_from_json(j);
            if (entity.entity_id != canonical_id(entity.assignments))
                throw ImportError(i + 1, "entity_id does not match its assignments");
            entities.push_back(std::move(entity));
        } catch (const ImportError&) {
            throw;
        } catch (const std::exception& e) {
            throw ImportError(i + 1, e.what());
        }
    }

    std::lock_guard<std::mutex> lock(mutex_);
    Transaction txn(*this);
    for (const auto& entity : entities) {
        ensure_entity_locked(entity.assignments, entity.created_at);
        for (const auto& result : entity.results) {
            validate_result(result);
            insert_result_locked(entity.entity_id, result);
        }
    }
    txn.commit();
}

void SampleStore::put_space_definition(const std::string& space_id,
                                       const nlohmann::json& definition) {
    std::lock_guard<std::mutex> lock(mutex_);
    Transaction txn(*this);
    Stmt lookup(db_, "SELECT COUNT(*) FROM spaces WHERE space_id = ?1");
    lookup.bind(1, space_id);
    lookup.row();
    if (lookup.integer(0) > 0)
        throw ConfigurationError("space '" + space_id + "' already exists in this store");
    Stmt insert(db_, "INSERT INTO spaces(space_id, definition) VALUES(?1, ?2)");
    insert.bind(1, space_id).bind(2, definition.dump());
    insert.run();
    txn.commit();
}

std::optional<nlohmann::json> SampleStore::get_space_definition(const std::string& space_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    Stmt stmt(db_, "SELECT definition FROM spaces WHERE space_id = ?1");
    stmt.bind(1, space_id);
    if (!stmt.row()) return std::nullopt;
    return nlohmann::json::parse(stmt.text(0));
}

std::vector<std::string> SampleStore::list_spaces() {
    std::lock_guard<std::mutex> lock(mutex_);
    Stmt stmt(db_, "SELECT space_id FROM spaces ORDER BY space_id");
    std::vector<std::string> out;
    while (stmt.row()) out.push_back(stmt.text(0));
    return out;
}

void SampleStore::append_record(const std::string& space_id, const RecordEntry& entry) {
    std::lock_guard<std::mutex> lock(mutex_);
    Transaction txn(*this);
    Stmt insert(db_,
                "INSERT INTO sampling_records(space_id, operation_id, seq, entity_id, origin,"
                " timestamp) VALUES(?1, ?2, ?3, ?4, ?5, ?6)");
    insert.bind(1, space_id)
        .bind(2, entry.operation_id)
        .bind(3, entry.seq)
        .bind(4, entry.entity_id)
        .bind(5, entry.origin)
        .bind(6, entry.timestamp);
    insert.run();
    txn.commit();
}

std::vector<RecordEntry> SampleStore::read_record(const std::string& space_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    Stmt stmt(db_,
              "SELECT operation_id, seq, entity_id, origin, timestamp FROM sampling_records"
              " WHERE space_id = ?1 ORDER BY id");
    stmt.bind(1, space_id);
    std::vector<RecordEntry> out;
    while (stmt.row()) {
        RecordEntry entry;
        entry.operation_id = stmt.text(0);
        entry.seq = stmt.integer(1);
        entry.entity_id = stmt.text(2);
        entry.origin = stmt.text(3);
        entry.timestamp = stmt.integer(4);
        out.push_back(std::move(entry));
    }
    return out;
}

std::int64_t SampleStore::next_seq(const std::string& space_id, const std::string& operation_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    Stmt stmt(db_,
              "SELECT COALESCE(MAX(seq) + 1, 0) FROM sampling_records"
              " WHERE space_id = ?1 AND operation_id = ?2");
    stmt.bind(1, space_id).bind(2, operation_id);
    stmt.row();
    return stmt.integer(0);
}

}  // namespace dspace
