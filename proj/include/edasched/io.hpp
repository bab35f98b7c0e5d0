#pragma once

// JSON documents for instances, mixture specs and finalized populations.

#include "edasched/eda.hpp"
#include "edasched/mixture.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace edasched {

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Document is not valid JSON or misses/mistypes a field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mixture together with the static jobs its samples are attached to.
struct ProblemSpec {
  MixtureSpec mixture;
  StaticJobs jobs;
};

nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& doc);

nlohmann::json problem_to_json(const ProblemSpec& problem);
/// Jobs default to random_static_jobs(n, derive_seed(seed, 1)) when absent.
ProblemSpec problem_from_json(const nlohmann::json& doc);

struct PopulationFile {
  Population population;
  StaticJobs jobs;
  double eps = 0.0;
};

nlohmann::json population_to_json(const Population& pop, const StaticJobs& jobs, double eps);
PopulationFile population_from_json(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc, int indent = 2);

}  // namespace edasched
