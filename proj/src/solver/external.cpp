#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <atomic>
#include <unistd.h>

#include "ltr/core/errors.hpp"
#include "ltr/solver/solver.hpp"

namespace ltr::milp {

namespace {

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
    for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
        text.replace(pos, key.size(), value);
    }
    return text;
}

std::string quote(const std::string& path) {
    std::string out = "'";
    for (char ch : path) {
        if (ch == '\'') {
            out += "'\\''";
        } else {
            out += ch;
        }
    }
    return out + "'";
}

}  // namespace

ExternalLpBackend::ExternalLpBackend(std::string command_template, std::string work_directory)
    : command_template_(std::move(command_template)), work_directory_(std::move(work_directory)) {
    if (command_template_.find("{lp}") == std::string::npos) {
        throw DomainError("external solver command must contain {lp}");
    }
}

SolveResult parse_solution_file(const MilpModel& model, const std::string& text) {
    std::istringstream in(text);
    std::string status;
    SolveResult result;
    if (!(in >> status)) {
        result.status = SolveStatus::NumericalFailure;
        result.diagnostic = "empty solution file";
        return result;
    }
    std::string rest;
    std::getline(in, rest);
    if (status == "infeasible") {
        result.status = SolveStatus::Infeasible;
        return result;
    }
    if (status == "timelimit") {
        result.status = SolveStatus::TimedOut;
        return result;
    }
    if (status != "optimal" && status != "feasible") {
        result.status = SolveStatus::NumericalFailure;
        result.diagnostic = "external solver reported '" + status + "'";
        return result;
    }
    std::vector<double> values(model.variable_count(), 0.0);
    std::vector<char> seen(model.variable_count(), 0);
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string name;
        double value = 0.0;
        if (!(ls >> name)) {
            continue;
        }
        if (!(ls >> value)) {
            throw ParseError("solution line " + std::to_string(line_no) + ": missing value for '" + name + "'");
        }
        if (!model.has_name(name)) {
            throw ParseError("solution line " + std::to_string(line_no) + ": unknown variable '" + name + "'");
        }
        const auto id = model.find(name);
        values[id.index] = value;
        seen[id.index] = 1;
    }
    // Solvers commonly omit zero-valued columns; anything missing must admit 0.
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto& v = model.variables()[k];
        if (!seen[k] && (v.lo > 0.0 || v.hi < 0.0)) {
            throw ParseError("solution omits variable '" + v.name + "'");
        }
    }
    result.status = SolveStatus::Feasible;
    result.assignment.values = std::move(values);
    return result;
}

SolveResult ExternalLpBackend::solve(const MilpModel& model, const SolverConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(work_directory_);
    static std::atomic<unsigned> counter{0};
    const std::string stem = "model_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
    const fs::path lp_path = fs::path(work_directory_) / (stem + ".lp");
    const fs::path sol_path = fs::path(work_directory_) / (stem + ".sol");
    {
        std::ofstream out(lp_path);
        if (!out) {
            throw IoError("cannot write " + lp_path.string());
        }
        out << export_lp(model);
    }
    fs::remove(sol_path);
    std::string command = replace_all(command_template_, "{lp}", quote(lp_path.string()));
    command = replace_all(command, "{sol}", quote(sol_path.string()));
    command = replace_all(command, "{timeout}", std::to_string(config.timeout_seconds));
    const int rc = std::system(command.c_str());

    SolveResult result;
    std::ifstream in(sol_path);
    if (rc != 0 || !in) {
        result.status = SolveStatus::NumericalFailure;
        result.diagnostic = "external solver exited with status " + std::to_string(rc);
    } else {
        std::stringstream buffer;
        buffer << in.rdbuf();
        result = parse_solution_file(model, buffer.str());
        if (result.status == SolveStatus::Feasible) {
            auto violations =
                check_assignment(model, result.assignment, {config.feasibility_tolerance, config.integrality_tolerance});
            if (!violations.empty()) {
                result.status = SolveStatus::NumericalFailure;
                result.diagnostic = "external solution violates " + violations.front().tag;
            }
        }
    }
    result.stats.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace ltr::milp
