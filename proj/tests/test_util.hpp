#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dspace/space.hpp"

namespace testutil {

// Self-deleting temporary directory for store files and fixtures.
class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "dspace-test-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path_ = buf.data();
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the built CLI binary with the given argument string, capturing both
// streams and the exit status.
inline CliResult run_cli(const std::string& args) {
    TempDir dir;
    std::string out_path = dir.file("out"), err_path = dir.file("err");
    std::string cmd = std::string(DSPACE_CLI_PATH) + " " + args + " >" + out_path + " 2>" + err_path;
    int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

// A 2x3 numeric/categorical space used across tests.
inline dspace::ProbabilitySpace small_space() {
    dspace::ProbabilitySpace space;
    space.dimensions.push_back({"batch",
                                dspace::DimensionKind::discrete_numeric,
                                {dspace::Value(2.0), dspace::Value(4.0)},
                                {}});
    space.dimensions.push_back({"mode",
                                dspace::DimensionKind::categorical,
                                {dspace::Value(std::string("a")), dspace::Value(std::string("b")),
                                 dspace::Value(std::string("c"))},
                                {}});
    return space;
}

inline dspace::Configuration config_of(std::map<std::string, dspace::Value> assignments) {
    dspace::Configuration config;
    config.assignments = std::move(assignments);
    return config;
}

// CSV characterization of small_space: latency = 10*batch + mode offset.
inline std::string small_table() {
    return "batch,mode,latency,status,cost_s\n"
           "2,a,21,ok,1.5\n"
           "2,b,22,ok,1.5\n"
           "2,c,23,ok,1.5\n"
           "4,a,41,ok,2.5\n"
           "4,b,42,ok,2.5\n"
           "4,c,43,failed,0.5\n";
}

inline dspace::Experiment tabular_experiment(const std::string& csv_path,
                                             const std::string& name = "bench",
                                             const std::vector<std::string>& props = {"latency"}) {
    dspace::Experiment exp;
    exp.name = name;
    exp.actuator_kind = "tabular";
    exp.actuator_settings = {{"path", csv_path}};
    exp.measured_properties = props;
    return exp;
}

}  // namespace testutil
