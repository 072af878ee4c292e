#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hysterid/bifidelity.hpp"
#include "hysterid/simulate.hpp"

namespace hysterid {

/// The published configuration schema (configs/run_config.schema.json),
/// compiled into the library.
const nlohmann::json& run_config_schema();

/// Checks `doc` against the subset of JSON Schema used by the run
/// configuration: type, enum, required, properties, additionalProperties,
/// items, minItems, minimum, maximum, exclusiveMinimum, exclusiveMaximum.
/// Throws ConfigError carrying the JSON pointer of the first violation.
void validate_schema(const nlohmann::json& doc, const nlohmann::json& schema);

struct RunConfig {
    ExampleId example = ExampleId::ex1_caseI;
    std::uint64_t seed = 1;
    int repetitions = 1;
    std::string output_dir = "runs";
    ExampleConfig simulation;
    DatasetRequest dataset;
    ExperimentSpec experiment;
    std::vector<std::string> qois;
    std::vector<std::size_t> sizes;
    std::vector<double> zetas;
    std::vector<double> noise_pct;

    /// Root seeds of the repetitions: seed itself, then derive_seed(seed, {r}) for r >= 1.
    std::vector<std::uint64_t> repetition_seeds() const;
    nlohmann::json to_json() const;
};

/// Per-example defaults: network, optimizer and dataset sizes as published.
RunConfig default_run_config(ExampleId id);

/// Validates against the schema, then overlays the document on the example defaults.
RunConfig parse_run_config(const nlohmann::json& doc);
/// Throws IoError when the file is missing, ConfigError when it is not valid JSON.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace hysterid
