#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dspace/discovery.hpp"
#include "dspace/json_util.hpp"
#include "dspace/metrics.hpp"
#include "dspace/optimizers.hpp"
#include "dspace/transfer.hpp"
#include "dspace/yaml_config.hpp"

namespace {

using namespace dspace;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_no_transfer = 3;
constexpr int exit_usage = 64;
constexpr int exit_schema = 65;

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

Objective parse_objective(const std::string& text) {
    std::size_t colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw ConfigurationError("--objective must be <property>:<min|max>, got '" + text + "'");
    Objective objective;
    objective.property = text.substr(0, colon);
    objective.direction = direction_from_string(text.substr(colon + 1));
    return objective;
}

nlohmann::json sample_to_json(const Sample& sample) {
    nlohmann::json j;
    j["configuration"] = assignments_to_json(sample.configuration.assignments);
    j["entity_id"] = sample.entity_id;
    j["operation_id"] = sample.operation_id;
    j["origin"] = sample.origin;
    j["seq"] = sample.seq;
    nlohmann::json properties = nlohmann::json::object();
    for (const auto& [name, prop] : sample.property_values) {
        nlohmann::json p;
        p["experiment"] = prop.experiment;
        p["status"] = prop.status;
        if (!prop.unit.empty()) p["unit"] = prop.unit;
        p["value"] = prop.value;
        properties[name] = p;
    }
    j["property_values"] = properties;
    nlohmann::json failures = nlohmann::json::object();
    for (const auto& [experiment, reason] : sample.failures) failures[experiment] = reason;
    j["failures"] = failures;
    return j;
}

nlohmann::json operation_result_to_json(const OperationResult& result) {
    nlohmann::json j;
    j["schema_version"] = "dspace-operation/1";
    j["operation_id"] = result.operation_id;
    j["optimizer"] = result.optimizer;
    j["objective"] = {{"property", result.objective.property},
                      {"direction", to_string(result.objective.direction)}};
    j["steps_taken"] = result.steps_taken;
    j["new_measurements"] = result.new_measurements;
    j["reused"] = result.reused;
    j["failed"] = result.failed;
    j["stop_reason"] = result.stop_reason;
    if (result.has_best) {
        j["best"] = {{"configuration", assignments_to_json(result.best_configuration.assignments)},
                     {"value", result.best_value}};
    } else {
        j["best"] = nullptr;
    }
    j["trajectory"] = result.trajectory;
    j["normalized_cost"] =
        result.steps_taken > 0 ? nlohmann::json(normalized_cost(result)) : nlohmann::json(nullptr);
    return j;
}

int run(int argc, char** argv) {
    CLI::App app{"Discovery-space toolkit: define configuration spaces, run optimizations and "
                 "knowledge transfers, query the shared sample store"};
    app.require_subcommand(1);

    auto registry = ActuatorRegistry::with_builtins();

    // space create
    auto* space_cmd = app.add_subcommand("space", "Space definition commands");
    space_cmd->require_subcommand(1);
    auto* space_create = space_cmd->add_subcommand("create", "Create a discovery space");
    std::string space_file, store_path;
    space_create->add_option("-f,--file", space_file, "Space definition YAML")->required();
    space_create->add_option("--store", store_path, "Store path")->required();

    // op run
    auto* op_cmd = app.add_subcommand("op", "Operation commands");
    op_cmd->require_subcommand(1);
    auto* op_run = op_cmd->add_subcommand("run", "Run an optimization operation");
    std::string op_space, op_optimizer = "random_walk", op_objective, op_id;
    std::uint64_t op_seed = 0;
    std::size_t op_patience = 5, op_budget = 0;
    op_run->add_option("--space", op_space, "Space id")->required();
    op_run->add_option("--optimizer", op_optimizer,
                       "random_walk | latin_hypercube | simulated_annealing | smbo_lite");
    op_run->add_option("--seed", op_seed, "RNG seed");
    op_run->add_option("--patience", op_patience, "Stop after this many non-improving steps");
    op_run->add_option("--budget", op_budget, "Maximum samples (0 = full space)");
    op_run->add_option("--objective", op_objective, "<property>:<min|max>")->required();
    op_run->add_option("--operation-id", op_id, "Operation id (default <optimizer>-<seed>)");
    op_run->add_option("--store", store_path, "Store path")->required();

    // transfer run
    auto* transfer_cmd = app.add_subcommand("transfer", "Knowledge-transfer commands");
    transfer_cmd->require_subcommand(1);
    auto* transfer_run = transfer_cmd->add_subcommand("run", "Run representative sub-space comparison");
    std::string transfer_file, predictions_path;
    transfer_run->add_option("-f,--file", transfer_file, "Transfer job YAML")->required();
    transfer_run->add_option("--store", store_path, "Store path")->required();
    transfer_run->add_option("--predictions-csv", predictions_path,
                             "Also write predictions to this CSV file");

    // store query / record / export / import
    auto* store_cmd = app.add_subcommand("store", "Store commands");
    store_cmd->require_subcommand(1);
    auto* store_query = store_cmd->add_subcommand("query", "Dump a space's sampled data");
    std::string query_space, query_format = "jsonl";
    store_query->add_option("--space", query_space, "Space id")->required();
    store_query->add_option("--store", store_path, "Store path")->required();
    store_query->add_option("--format", query_format, "csv | jsonl");
    auto* store_record = store_cmd->add_subcommand("record", "Dump a space's sampling record CSV");
    store_record->add_option("--space", query_space, "Space id")->required();
    store_record->add_option("--store", store_path, "Store path")->required();
    auto* store_export = store_cmd->add_subcommand("export", "Export the store to JSON-lines");
    std::string transfer_path;
    store_export->add_option("--store", store_path, "Store path")->required();
    store_export->add_option("--out", transfer_path, "Output file")->required();
    auto* store_import = store_cmd->add_subcommand("import", "Import a JSON-lines snapshot");
    store_import->add_option("--store", store_path, "Store path")->required();
    store_import->add_option("--file", transfer_path, "Input file")->required();

    // report savings / baseline
    auto* report_cmd = app.add_subcommand("report", "Evaluation reports");
    report_cmd->require_subcommand(1);
    auto* report_savings = report_cmd->add_subcommand("savings", "Average normalized cost by run order");
    std::vector<std::string> savings_spaces;
    std::size_t permutations = 100;
    std::uint64_t report_seed = 0;
    report_savings->add_option("--store", store_path, "Store path")->required();
    report_savings->add_option("--spaces", savings_spaces, "Space ids, one run each")->required();
    report_savings->add_option("--permutations", permutations, "Run-order permutations");
    report_savings->add_option("--seed", report_seed, "Permutation RNG seed");
    auto* report_baseline = report_cmd->add_subcommand("baseline", "Random-walk success curve");
    std::uint64_t baseline_n = 0, baseline_k = 0, baseline_draws = 0;
    report_baseline->add_option("--N", baseline_n, "Space size")->required();
    report_baseline->add_option("--K", baseline_k, "Target-region size")->required();
    report_baseline->add_option("--max-draws", baseline_draws, "Draw counts 0..m")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cout, std::cerr);
        return exit_usage;
    }

    if (space_create->parsed()) {
        SpaceDocument doc = load_space_yaml(space_file);
        auto store = std::make_shared<SampleStore>(store_path);
        DiscoverySpace::create(store, registry, doc.space_id, doc.space, doc.actions, doc.policy);
        std::cout << doc.space_id << "\n";
        return exit_ok;
    }
    if (op_run->parsed()) {
        Objective objective = parse_objective(op_objective);
        auto store = std::make_shared<SampleStore>(store_path);
        DiscoverySpace ds = DiscoverySpace::open(store, registry, op_space);
        auto optimizer = make_optimizer(op_optimizer);
        if (op_id.empty()) op_id = optimizer->kind() + "-" + std::to_string(op_seed);
        OperationResult result =
            run_optimization(ds, *optimizer, objective, op_patience, op_seed, op_budget, op_id);
        std::cout << operation_result_to_json(result).dump(2) << "\n";
        return exit_ok;
    }
    if (transfer_run->parsed()) {
        TransferJob job = load_transfer_yaml(transfer_file);
        auto store = std::make_shared<SampleStore>(store_path);
        TransferReport report = run_rssc(store, registry, job);
        std::cout << transfer_report_to_json(report).dump(2) << "\n";
        if (!predictions_path.empty()) {
            std::ofstream out(predictions_path, std::ios::binary);
            if (!out) throw ConfigurationError("cannot write '" + predictions_path + "'");
            out << predictions_csv(report);
        }
        return report.decision.transfer ? exit_ok : exit_no_transfer;
    }
    if (store_query->parsed()) {
        if (query_format != "csv" && query_format != "jsonl")
            throw ConfigurationError("--format must be 'csv' or 'jsonl', got '" + query_format + "'");
        auto store = std::make_shared<SampleStore>(store_path);
        DiscoverySpace ds = DiscoverySpace::open(store, registry, query_space);
        std::vector<Sample> samples = ds.read();
        if (query_format == "jsonl") {
            for (const auto& sample : samples) std::cout << sample_to_json(sample).dump() << "\n";
        } else {
            std::vector<std::string> dims;
            for (const auto& dim : ds.space().dimensions) dims.push_back(dim.name);
            std::vector<std::string> props;
            for (const auto& exp : ds.actions().experiments)
                for (const auto& prop : exp.measured_properties) props.push_back(prop);
            std::cout << "operation_id,seq,entity_id,origin";
            for (const auto& dim : dims) std::cout << "," << csv_field(dim);
            for (const auto& prop : props) std::cout << "," << csv_field(prop);
            std::cout << "\r\n";
            for (const auto& sample : samples) {
                std::cout << csv_field(sample.operation_id) << "," << sample.seq << ","
                          << sample.entity_id << "," << sample.origin;
                for (const auto& dim : dims)
                    std::cout << ","
                              << csv_field(value_text(sample.configuration.assignments.at(dim)));
                for (const auto& prop : props) {
                    auto it = sample.property_values.find(prop);
                    std::cout << ",";
                    if (it != sample.property_values.end())
                        std::cout << csv_field(value_text(Value(it->second.value)));
                }
                std::cout << "\r\n";
            }
        }
        return exit_ok;
    }
    if (store_record->parsed()) {
        auto store = std::make_shared<SampleStore>(store_path);
        DiscoverySpace ds = DiscoverySpace::open(store, registry, query_space);
        std::cout << ds.record_csv();
        return exit_ok;
    }
    if (store_export->parsed()) {
        auto store = std::make_shared<SampleStore>(store_path);
        store->export_file(transfer_path);
        std::cerr << "exported " << store->entity_count() << " entities\n";
        return exit_ok;
    }
    if (store_import->parsed()) {
        auto store = std::make_shared<SampleStore>(store_path);
        store->import_file(transfer_path);
        std::cerr << "imported into " << store_path << "\n";
        return exit_ok;
    }
    if (report_savings->parsed()) {
        auto store = std::make_shared<SampleStore>(store_path);
        std::vector<std::vector<std::string>> runs;
        for (const auto& space_id : savings_spaces) {
            if (!store->get_space_definition(space_id))
                throw ConfigurationError("space '" + space_id + "' does not exist in this store");
            std::vector<std::string> proposals;
            std::set<std::string> seen;
            for (const auto& entry : store->read_record(space_id))
                if (seen.insert(entry.entity_id).second) proposals.push_back(entry.entity_id);
            if (proposals.empty())
                throw ConfigurationError("space '" + space_id + "' has an empty sampling record");
            runs.push_back(std::move(proposals));
        }
        std::vector<double> means = average_normalized_cost(runs, permutations, report_seed);
        std::cout << "position,average_normalized_cost\r\n";
        for (std::size_t i = 0; i < means.size(); ++i)
            std::cout << i + 1 << "," << value_text(Value(means[i])) << "\r\n";
        return exit_ok;
    }
    if (report_baseline->parsed()) {
        std::cout << "draws,probability\r\n";
        for (std::uint64_t n = 0; n <= baseline_draws; ++n)
            std::cout << n << "," << value_text(Value(hypergeometric_success(baseline_n, baseline_k, n)))
                      << "\r\n";
        return exit_ok;
    }
    return exit_usage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_schema;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
