#include "dspace/actuators.hpp"

#include "dspace/json_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace dspace {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

double parse_number(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigurationError("cannot parse '" + text + "' as a number for " + what);
    }
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

TabularWorkload::TabularWorkload(const std::string& csv_path) : path_(csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw ConfigurationError("cannot open workload table '" + csv_path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ConfigurationError("workload table '" + csv_path + "' is empty");
    columns_ = split_csv_line(line);
    has_status_ = std::find(columns_.begin(), columns_.end(), "status") != columns_.end();
    has_cost_ = std::find(columns_.begin(), columns_.end(), "cost_s") != columns_.end();
    if (!has_status_)
        throw ConfigurationError("workload table '" + csv_path + "' lacks a status column");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != columns_.size())
            throw ConfigurationError("workload table '" + csv_path + "' line " +
                                     std::to_string(line_no) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(columns_.size()));
        Row row;
        for (std::size_t i = 0; i < columns_.size(); ++i) row.cells[columns_[i]] = cells[i];
        rows_.push_back(std::move(row));
    }
}

const TabularWorkload::Row* TabularWorkload::find_row(const Configuration& config) {
    std::vector<std::string> key_columns;
    for (const auto& [name, value] : config.assignments) {
        (void)value;
        key_columns.push_back(name);
    }
    if (key_columns != key_columns_) {
        for (const auto& name : key_columns)
            if (std::find(columns_.begin(), columns_.end(), name) == columns_.end())
                throw ConfigurationError("workload table '" + path_ + "' has no column '" + name + "'");
        index_.clear();
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            std::string key;
            for (const auto& name : key_columns) key += rows_[i].cells.at(name) + "\x1f";
            auto [it, inserted] = index_.emplace(key, i);
            (void)it;
            if (!inserted)
                throw ConfigurationError("workload table '" + path_ +
                                         "' characterizes the same configuration twice");
        }
        key_columns_ = key_columns;
    }
    std::string key;
    for (const auto& name : key_columns_) key += value_text(config.assignments.at(name)) + "\x1f";
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &rows_[it->second];
}

MeasurementResult TabularWorkload::measure(const Experiment& experiment,
                                           const Configuration& config) {
    MeasurementResult result;
    result.experiment_name = experiment.name;
    result.experiment_parameters = experiment.parameters;
    result.measured_at = utc_now_ns();

    const Row* row = find_row(config);
    if (row == nullptr) {
        result.status = "failed";
        result.failure_reason = "uncharacterized configuration";
        return result;
    }
    if (row->cells.at("status") == "failed") {
        result.status = "failed";
        result.failure_reason = "characterized as failed";
        return result;
    }
    for (const auto& prop : experiment.measured_properties) {
        auto cell = row->cells.find(prop);
        if (cell == row->cells.end())
            throw ConfigurationError("workload table '" + path_ + "' has no column for property '" +
                                     prop + "'");
        PropertyValue pv;
        pv.value = parse_number(cell->second, "property '" + prop + "'");
        result.property_values[prop] = pv;
    }
    return result;
}

std::optional<double> TabularWorkload::row_cost(const Configuration& config) {
    if (!has_cost_) return std::nullopt;
    const Row* row = find_row(config);
    if (row == nullptr) return std::nullopt;
    return parse_number(row->cells.at("cost_s"), "cost_s");
}

SyntheticSurface::SyntheticSurface(const nlohmann::json& settings) : settings_(settings) {
    if (!settings_.is_object()) throw ConfigurationError("synthetic surface settings must be an object");
    seed_ = settings_.value("seed", 0ull);
    if (settings_.contains("noise")) {
        const auto& noise = settings_.at("noise");
        std::string kind = noise.value("kind", "none");
        if (kind == "gaussian") {
            sigma_ = noise.value("sigma", 0.0);
            if (!(sigma_ > 0.0))
                throw ConfigurationError("gaussian noise needs a positive sigma");
        } else if (kind != "none") {
            throw ConfigurationError("unknown noise kind '" + kind + "'");
        }
    }
    for (const auto& term : settings_.value("terms", nlohmann::json::array()))
        if (!term.contains("dimension"))
            throw ConfigurationError("synthetic surface term lacks a dimension");
    for (const auto& inter : settings_.value("interactions", nlohmann::json::array()))
        if (!inter.contains("dimensions") || inter.at("dimensions").size() != 2)
            throw ConfigurationError("synthetic surface interaction needs exactly 2 dimensions");
}

namespace {

double numeric_assignment(const Configuration& config, const std::string& dimension) {
    auto it = config.assignments.find(dimension);
    if (it == config.assignments.end())
        throw ConfigurationError("configuration lacks dimension '" + dimension + "'");
    if (!std::holds_alternative<double>(it->second))
        throw ConfigurationError("dimension '" + dimension + "' is not numeric");
    return std::get<double>(it->second);
}

}  // namespace

double SyntheticSurface::objective(const Configuration& config) const {
    double value = settings_.value("bias", 0.0);
    for (const auto& term : settings_.value("terms", nlohmann::json::array())) {
        std::string dimension = term.at("dimension").get<std::string>();
        if (term.contains("levels")) {
            auto it = config.assignments.find(dimension);
            if (it == config.assignments.end())
                throw ConfigurationError("configuration lacks dimension '" + dimension + "'");
            std::string level = value_text(it->second);
            const auto& levels = term.at("levels");
            if (!levels.contains(level))
                throw ConfigurationError("surface term for dimension '" + dimension +
                                         "' has no level '" + level + "'");
            value += levels.at(level).get<double>();
        } else {
            double v = numeric_assignment(config, dimension);
            double scale = term.value("scale", 1.0);
            double quadratic = term.value("quadratic", 0.0);
            double center = term.value("center", 0.0);
            value += scale * v + quadratic * (v - center) * (v - center);
        }
    }
    for (const auto& inter : settings_.value("interactions", nlohmann::json::array())) {
        std::string d1 = inter.at("dimensions").at(0).get<std::string>();
        std::string d2 = inter.at("dimensions").at(1).get<std::string>();
        if (inter.contains("table")) {
            auto i1 = config.assignments.find(d1);
            auto i2 = config.assignments.find(d2);
            if (i1 == config.assignments.end() || i2 == config.assignments.end())
                throw ConfigurationError("configuration lacks an interaction dimension");
            std::string key = value_text(i1->second) + "|" + value_text(i2->second);
            const auto& table = inter.at("table");
            if (table.contains(key)) value += table.at(key).get<double>();
        } else {
            double scale = inter.value("scale", 1.0);
            value += scale * numeric_assignment(config, d1) * numeric_assignment(config, d2);
        }
    }
    return value;
}

bool SyntheticSurface::fails(const Configuration& config) const {
    if (!settings_.contains("failure")) return false;
    const auto& failure = settings_.at("failure");
    std::string dimension = failure.at("dimension").get<std::string>();
    auto it = config.assignments.find(dimension);
    if (it == config.assignments.end()) return false;
    std::string text = value_text(it->second);
    for (const auto& v : failure.at("values"))
        if (value_text(value_from_json(v)) == text) return true;
    return false;
}

MeasurementResult SyntheticSurface::measure(const Experiment& experiment,
                                            const Configuration& config) {
    MeasurementResult result;
    result.experiment_name = experiment.name;
    result.experiment_parameters = experiment.parameters;
    result.measured_at = utc_now_ns();

    if (fails(config)) {
        result.status = "failed";
        result.failure_reason = "synthetic failure predicate";
        return result;
    }
    double value = objective(config);
    if (sigma_ > 0.0) {
        std::mt19937_64 rng(seed_ ^ fnv1a(canonical_id(config)));
        double u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        value += sigma_ * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    for (const auto& prop : experiment.measured_properties) {
        PropertyValue pv;
        pv.value = value;
        result.property_values[prop] = pv;
    }
    return result;
}

CommandRunner::CommandRunner(const nlohmann::json& settings) {
    if (!settings.is_object() || !settings.contains("template"))
        throw ConfigurationError("command actuator needs a 'template' setting");
    template_ = settings.at("template").get<std::string>();
    timeout_s_ = settings.value("timeout_s", 60.0);
    if (!(timeout_s_ > 0.0)) throw ConfigurationError("command timeout must be positive");
}

namespace {

bool placeholder_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

// Replaces {name} placeholders with configuration values. Only braces around
// a dimension-name-shaped token are placeholders, so templates may contain
// literal braces (JSON output, shell constructs).
std::string substitute(const std::string& templ, const Configuration& config) {
    std::string out;
    std::size_t pos = 0;
    while (pos < templ.size()) {
        char c = templ[pos];
        if (c != '{') {
            out += c;
            ++pos;
            continue;
        }
        std::size_t end = pos + 1;
        while (end < templ.size() && placeholder_char(templ[end])) ++end;
        if (end == pos + 1 || end >= templ.size() || templ[end] != '}') {
            out += c;
            ++pos;
            continue;
        }
        std::string name = templ.substr(pos + 1, end - pos - 1);
        auto it = config.assignments.find(name);
        if (it == config.assignments.end())
            throw ConfigurationError("command template references unknown dimension '" + name + "'");
        out += value_text(it->second);
        pos = end + 1;
    }
    return out;
}

struct CommandOutput {
    int exit_status = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

CommandOutput run_command(const std::string& command, double timeout_s) {
    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
        throw StoreError("pipe creation failed: " + std::string(std::strerror(errno)));
    pid_t pid = fork();
    if (pid < 0) throw StoreError("fork failed: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        setpgid(0, 0);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);

    CommandOutput result;
    struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    bool open_fd[2] = {true, true};
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(static_cast<long>(timeout_s * 1000.0));
    char buf[4096];
    while (open_fd[0] || open_fd[1]) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                             deadline - std::chrono::steady_clock::now())
                             .count();
        if (remaining <= 0) {
            result.timed_out = true;
            kill(-pid, SIGKILL);
            break;
        }
        int rc = poll(fds, 2, static_cast<int>(remaining));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (!open_fd[i] || fds[i].revents == 0) continue;
            ssize_t n = read(fds[i].fd, buf, sizeof(buf));
            if (n > 0) {
                (i == 0 ? result.out : result.err).append(buf, static_cast<std::size_t>(n));
            } else {
                open_fd[i] = false;
                fds[i].fd = -1;
            }
        }
    }
    close(out_pipe[0]);
    close(err_pipe[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) result.exit_status = WEXITSTATUS(status);
    return result;
}

}  // namespace

MeasurementResult CommandRunner::measure(const Experiment& experiment,
                                         const Configuration& config) {
    MeasurementResult result;
    result.experiment_name = experiment.name;
    result.experiment_parameters = experiment.parameters;
    result.measured_at = utc_now_ns();

    CommandOutput output = run_command(substitute(template_, config), timeout_s_);
    auto fail = [&](const std::string& reason) {
        result.status = "failed";
        result.failure_reason = reason;
        result.property_values.clear();
        return result;
    };
    if (output.timed_out) return fail("timeout");
    if (output.exit_status != 0)
        return fail("exit status " + std::to_string(output.exit_status) + ": " +
                    output.err.substr(0, 200));

    std::istringstream lines(output.out);
    std::string line, last;
    while (std::getline(lines, line))
        if (!line.empty()) last = line;
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(last);
    } catch (const nlohmann::json::exception& e) {
        return fail("cannot parse command output: " + std::string(e.what()));
    }
    if (!parsed.is_object()) return fail("command output is not a JSON object");
    for (const auto& prop : experiment.measured_properties) {
        if (!parsed.contains(prop) || !parsed.at(prop).is_number())
            return fail("property '" + prop + "' missing from command output");
        PropertyValue pv;
        pv.value = parsed.at(prop).get<double>();
        result.property_values[prop] = pv;
    }
    return result;
}

SurrogateActuator::SurrogateActuator(const nlohmann::json& settings, SampleStore* store)
    : store_(store) {
    if (store_ == nullptr) throw ConfigurationError("surrogate actuator needs a store");
    slope_ = settings.at("slope").get<double>();
    intercept_ = settings.at("intercept").get<double>();
    source_property_ = settings.at("source_property").get<std::string>();
    predicted_property_ = settings.at("predicted_property").get<std::string>();
}

MeasurementResult SurrogateActuator::measure(const Experiment& experiment,
                                             const Configuration& config) {
    MeasurementResult result;
    result.experiment_name = experiment.name;
    result.experiment_parameters = experiment.parameters;
    result.measured_at = utc_now_ns();

    std::optional<double> source;
    if (auto entity = store_->get_by_id(canonical_id(config))) {
        for (const auto& stored : entity->results) {
            if (stored.status != "ok") continue;
            auto it = stored.property_values.find(source_property_);
            if (it != stored.property_values.end() && it->second.status == "ok") {
                source = it->second.value;
                break;
            }
        }
    }
    if (!source) {
        result.status = "failed";
        result.failure_reason = "no source measurement for configuration";
        return result;
    }
    PropertyValue pv;
    pv.value = slope_ * *source + intercept_;
    result.property_values[predicted_property_] = pv;
    return result;
}

void ActuatorRegistry::register_kind(const std::string& kind, Factory factory) {
    factories_[kind] = std::move(factory);
}

std::shared_ptr<Actuator> ActuatorRegistry::resolve(const std::string& kind,
                                                    const nlohmann::json& settings,
                                                    SampleStore* store) {
    auto factory = factories_.find(kind);
    if (factory == factories_.end())
        throw ConfigurationError("unknown actuator kind '" + kind + "'");
    std::string key = kind + "\n" + settings.dump() + "\n" +
                      std::to_string(reinterpret_cast<std::uintptr_t>(store));
    auto cached = cache_.find(key);
    if (cached != cache_.end()) return cached->second;
    auto instance = factory->second(settings, store);
    cache_[key] = instance;
    return instance;
}

std::shared_ptr<ActuatorRegistry> ActuatorRegistry::with_builtins() {
    auto registry = std::make_shared<ActuatorRegistry>();
    registry->register_kind("tabular", [](const nlohmann::json& settings, SampleStore*) {
        if (!settings.contains("path"))
            throw ConfigurationError("tabular actuator needs a 'path' setting");
        return std::make_shared<TabularWorkload>(settings.at("path").get<std::string>());
    });
    registry->register_kind("synthetic", [](const nlohmann::json& settings, SampleStore*) {
        return std::make_shared<SyntheticSurface>(settings);
    });
    registry->register_kind("command", [](const nlohmann::json& settings, SampleStore*) {
        return std::make_shared<CommandRunner>(settings);
    });
    registry->register_kind("surrogate", [](const nlohmann::json& settings, SampleStore* store) {
        return std::make_shared<SurrogateActuator>(settings, store);
    });
    return registry;
}

}  // namespace dspace
