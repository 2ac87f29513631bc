#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "aft/alpha_count.hpp"
#include "aft/hw_probe.hpp"
#include "aft/redundancy.hpp"

namespace aft::sim {

// A fully parsed scenario file. (kind, parameters, seed) determines every
// output byte; file references resolve against base_dir.
struct Scenario {
    std::string kind; // redundancy_experiment | pattern_experiment | probe_run
    int64_t length = 0;
    uint64_t seed = 0;
    std::filesystem::path base_dir = ".";

    // [faults] either a schedule file or a generated burst profile
    std::string schedule_file;
    double burst_rate = 0.0;
    int64_t burst_len = 1;
    bool has_burst = false;

    // [redundancy]
    redundancy::RedundancyPolicy policy;

    // [pattern]
    int max_retries = 10;
    alpha::AlphaConfig alpha_config;

    // [probe]
    std::string inventory_file;
    std::string kb_file;
    std::string methods_file;
    probe::FailureClass probe_default = probe::FailureClass::f4;
};

// `key = value` lines under `[section]` headers; unknown sections or keys are
// rejected by name. `#` starts a comment.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);

// Output files in a fixed emission order, name -> full content.
struct ScenarioOutputs {
    std::vector<std::pair<std::string, std::string>> files;
};

ScenarioOutputs run_scenario(const Scenario& scenario);
void write_outputs(const ScenarioOutputs& outputs, const std::filesystem::path& out_dir);

struct ReplayReport {
    bool ok = true;
    std::string detail;
};

// Re-runs the scenario and compares byte-wise against files under out_dir.
// A missing output file is an error, not a mismatch.
ReplayReport replay_check(const Scenario& scenario, const std::filesystem::path& out_dir);

std::string read_file(const std::filesystem::path& path);

} // namespace aft::sim
