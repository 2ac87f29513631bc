#include "aft/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "aft/errors.hpp"
#include "aft/pattern_dag.hpp"
#include "aft/textio.hpp"

namespace aft::sim {

namespace {

const std::set<std::string> kKnownKinds = {"redundancy_experiment", "pattern_experiment",
                                           "probe_run"};

void apply_key(Scenario& s, const std::string& section, const std::string& key,
               const std::string& value) {
    auto unknown = [&]() -> ConfigError {
        return ConfigError("unknown key '" + section + "." + key + "'");
    };
    if (section == "scenario") {
        if (key == "kind") s.kind = value;
        else if (key == "length") s.length = parse_int(value, "scenario.length");
        else if (key == "seed") {
            int64_t seed = parse_int(value, "scenario.seed");
            if (seed < 0)
                throw ConfigError("scenario.seed must be >= 0");
            s.seed = static_cast<uint64_t>(seed);
        } else throw unknown();
    } else if (section == "faults") {
        if (key == "schedule") s.schedule_file = value;
        else if (key == "burst_rate") {
            s.burst_rate = parse_double(value, "faults.burst_rate");
            s.has_burst = true;
        } else if (key == "burst_len") s.burst_len = parse_int(value, "faults.burst_len");
        else throw unknown();
    } else if (section == "redundancy") {
        if (key == "n_min") s.policy.n_min = static_cast<int>(parse_int(value, key));
        else if (key == "n_max") s.policy.n_max = static_cast<int>(parse_int(value, key));
        else if (key == "raise_threshold")
            s.policy.raise_threshold = static_cast<int>(parse_int(value, key));
        else if (key == "calm_window") s.policy.calm_window = parse_int(value, key);
        else if (key == "step") s.policy.step = static_cast<int>(parse_int(value, key));
        else if (key == "calm_margin") s.policy.calm_margin = static_cast<int>(parse_int(value, key));
        else throw unknown();
    } else if (section == "pattern") {
        if (key == "max_retries") s.max_retries = static_cast<int>(parse_int(value, key));
        else if (key == "decay") s.alpha_config.decay = parse_double(value, key);
        else if (key == "threshold") s.alpha_config.threshold = parse_double(value, key);
        else throw unknown();
    } else if (section == "probe") {
        if (key == "inventory") s.inventory_file = value;
        else if (key == "kb") s.kb_file = value;
        else if (key == "methods") s.methods_file = value;
        else if (key == "default") s.probe_default = probe::failure_class_from(value);
        else throw unknown();
    } else {
        throw ConfigError("unknown section '[" + section + "]'");
    }
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    Scenario s;
    std::string section;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("unterminated section header", line_no);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError("expected 'key = value'", line_no);
        if (section.empty())
            throw ParseError("key outside any [section]", line_no);
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        apply_key(s, section, key, value);
    }

    if (!kKnownKinds.count(s.kind))
        throw ConfigError("unknown or missing key 'scenario.kind' (got '" + s.kind + "')");
    if (s.kind != "probe_run" && s.length <= 0)
        throw ConfigError("key 'scenario.length' must be a positive step count");
    if (!s.schedule_file.empty() && s.has_burst)
        throw ConfigError("keys 'faults.schedule' and 'faults.burst_rate' are exclusive");
    if (s.kind == "pattern_experiment" && s.schedule_file.empty())
        throw ConfigError("pattern_experiment needs key 'faults.schedule'");
    if (s.kind == "probe_run") {
        if (s.inventory_file.empty())
            throw ConfigError("probe_run needs key 'probe.inventory'");
        if (s.kb_file.empty())
            throw ConfigError("probe_run needs key 'probe.kb'");
        if (s.methods_file.empty())
            throw ConfigError("probe_run needs key 'probe.methods'");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
    Scenario s = parse_scenario(read_file(file));
    s.base_dir = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

namespace {

fault::InjectionSchedule scenario_schedule(const Scenario& s) {
    if (!s.schedule_file.empty())
        return fault::parse_schedule(read_file(s.base_dir / s.schedule_file), s.seed);
    return fault::burst_profile(s.seed, s.length, s.burst_rate, s.burst_len);
}

ScenarioOutputs run_redundancy(const Scenario& s) {
    assumption::Registry registry;
    redundancy::ExperimentResult result =
        redundancy::run_experiment(scenario_schedule(s), s.policy, s.length, &registry);

    std::string events;
    for (const redundancy::RoundRecord& row : result.trace) {
        switch (row.event) {
        case redundancy::RoundEvent::raise:
            events += "t=" + std::to_string(row.t) + " raise n=" + std::to_string(row.n) +
                      "->" + std::to_string(row.n + s.policy.step) + "\n";
            break;
        case redundancy::RoundEvent::lower:
            events += "t=" + std::to_string(row.t) + " lower n=" + std::to_string(row.n) +
                      "->" + std::to_string(row.n - s.policy.step) + "\n";
            break;
        case redundancy::RoundEvent::raise_blocked:
            events += "t=" + std::to_string(row.t) +
                      " raise_blocked n=" + std::to_string(row.n) + "\n";
            break;
        case redundancy::RoundEvent::none:
            break;
        }
    }

    ScenarioOutputs out;
    out.files.emplace_back("trace.csv", redundancy::trace_csv(result.trace));
    out.files.emplace_back("histogram.csv", redundancy::histogram_csv(result.histogram));
    out.files.emplace_back("events.log", std::move(events));
    out.files.emplace_back("clashes.csv", registry.clash_log_csv());
    return out;
}

ScenarioOutputs run_pattern(const Scenario& s) {
    fault::InjectionSchedule schedule = scenario_schedule(s);

    assumption::Registry registry;
    for (assumption::Assumption& a : pattern::environment_assumptions())
        registry.register_assumption(std::move(a));

    pattern::DagSnapshot dag = pattern::make_redoing_dag("c3", s.max_retries);
    pattern::AlphaStates alpha;
    std::set<std::string> switched;

    std::string trace = "t,channel,alpha,latched\n";
    std::string events;
    fault::FaultCursor cursor(schedule);
    for (int64_t t = 0; t < s.length; ++t) {
        std::vector<fault::ActiveFault> faults = cursor.advance(t);
        pattern::StepOutcome outcome =
            pattern::execute_step(dag, faults, alpha, s.alpha_config);

        for (const pattern::ChannelReport& ch : outcome.channels) {
            trace += std::to_string(t) + "," + ch.channel + "," +
                     format_double(ch.alpha_after) + "," + (ch.latched_after ? "1" : "0") +
                     "\n";
            if (ch.task_failure)
                events += "t=" + std::to_string(t) + " task_failure component=" + ch.channel +
                          " attempts=" + std::to_string(ch.failed_attempts) + "\n";
        }
        for (const std::string& channel : outcome.switch_requests) {
            pattern::SwitchResult result =
                pattern::assess_and_switch(dag, switched, channel, &registry, t);
            if (result.switched) {
                dag = std::move(result.dag);
                events += "t=" + std::to_string(t) + " switch D1->D2 component=" + channel +
                          "\n";
                events += "t=" + std::to_string(t) + " rebind e1->e2 component=" + channel +
                          "\n";
            }
        }
    }

    ScenarioOutputs out;
    out.files.emplace_back("trace.csv", std::move(trace));
    out.files.emplace_back("events.log", std::move(events));
    out.files.emplace_back("clashes.csv", registry.clash_log_csv());
    return out;
}

ScenarioOutputs run_probe_scenario(const Scenario& s) {
    auto banks = probe::parse_inventory(read_file(s.base_dir / s.inventory_file));
    auto kb = probe::parse_kb(read_file(s.base_dir / s.kb_file));
    auto methods = probe::parse_methods(read_file(s.base_dir / s.methods_file));

    assumption::Registry registry;
    probe::ProbeReport report;
    int64_t index = 0;
    for (const probe::MemoryModuleDescriptor& bank : banks) {
        std::string slot = bank.slot.empty() ? "bank" + std::to_string(index) : bank.slot;
        std::string id = "memory_behavior:" + slot;
        if (registry.contains(id))
            id += "#" + std::to_string(index);
        registry.register_assumption({id, "failure semantics assumed for " + slot,
                                      assumption::BindingTime::deploy,
                                      assumption::ValueLiteral::text("f0"), std::nullopt,
                                      std::nullopt});

        probe::FailureClass behavior = probe::assess(kb, bank, s.probe_default);
        auto clash = registry.observe(id, assumption::ValueLiteral::text(to_string(behavior)),
                                      index);
        try {
            const probe::AccessMethod& method = probe::select_method(methods, behavior);
            report.rows.push_back({slot, behavior, method.id, method.cost});
            if (clash)
                registry.mark_handled(registry.clash_log().size() - 1);
        } catch (const probe::NoToleratingMethod&) {
            report.unservable.emplace_back(slot, behavior);
        }
        ++index;
    }
    if (!report.unservable.empty())
        throw probe::NoToleratingMethod(report.unservable.front().second,
                                        "slot " + report.unservable.front().first);

    ScenarioOutputs out;
    out.files.emplace_back("report.csv", probe::report_csv(report));
    out.files.emplace_back("clashes.csv", registry.clash_log_csv());
    return out;
}

} // namespace

ScenarioOutputs run_scenario(const Scenario& scenario) {
    if (scenario.kind == "redundancy_experiment")
        return run_redundancy(scenario);
    if (scenario.kind == "pattern_experiment")
        return run_pattern(scenario);
    if (scenario.kind == "probe_run")
        return run_probe_scenario(scenario);
    throw ConfigError("unknown scenario kind '" + scenario.kind + "'");
}

void write_outputs(const ScenarioOutputs& outputs, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : outputs.files) {
        std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot write file '" + (out_dir / name).string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
}

ReplayReport replay_check(const Scenario& scenario, const std::filesystem::path& out_dir) {
    ScenarioOutputs fresh = run_scenario(scenario);
    for (const auto& [name, content] : fresh.files) {
        std::filesystem::path path = out_dir / name;
        if (!std::filesystem::exists(path))
            throw ConfigError("missing output file '" + path.string() + "'");
        if (read_file(path) != content)
            return {false, "output file '" + name + "' differs from the replay"};
    }
    return {true, ""};
}

} // namespace aft::sim
