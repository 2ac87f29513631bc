#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aft/errors.hpp"
#include "aft/hw_probe.hpp"
#include "aft/scenario.hpp"

namespace {

int cmd_run(const std::string& scenario_file, const std::string& out_dir) {
    aft::sim::Scenario scenario = aft::sim::load_scenario(scenario_file);
    aft::sim::ScenarioOutputs outputs = aft::sim::run_scenario(scenario);
    aft::sim::write_outputs(outputs, out_dir);
    for (const auto& [name, content] : outputs.files)
        std::cout << name << ": " << content.size() << " bytes\n";
    return 0;
}

int cmd_replay_check(const std::string& scenario_file, const std::string& out_dir) {
    aft::sim::Scenario scenario = aft::sim::load_scenario(scenario_file);
    aft::sim::ReplayReport report = aft::sim::replay_check(scenario, out_dir);
    if (!report.ok) {
        std::cerr << "replay mismatch: " << report.detail << "\n";
        return 1;
    }
    std::cout << "replay ok\n";
    return 0;
}

int cmd_probe(const std::string& inventory_file, const std::string& kb_file,
              const std::string& methods_file, const std::string& fallback) {
    auto banks = aft::probe::parse_inventory(aft::sim::read_file(inventory_file));
    auto kb = aft::probe::parse_kb(aft::sim::read_file(kb_file));
    auto methods = aft::probe::parse_methods(aft::sim::read_file(methods_file));
    auto report = aft::probe::run_probe(banks, kb, methods,
                                        aft::probe::failure_class_from(fallback));

    std::cout << aft::probe::report_csv(report);
    if (!report.unservable.empty()) {
        for (const auto& [slot, behavior] : report.unservable)
            std::cerr << "no access method tolerates behavior " << to_string(behavior)
                      << " (slot " << slot << ")\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic fault-tolerance toolkit"};
    app.require_subcommand(1);

    std::string scenario_file, out_dir;
    CLI::App* run = app.add_subcommand("run", "run a scenario and write its output files");
    run->add_option("scenario", scenario_file, "scenario file")->required();
    run->add_option("--out", out_dir, "output directory")->required();

    CLI::App* replay =
        app.add_subcommand("replay-check", "re-run a scenario and compare against --out");
    replay->add_option("scenario", scenario_file, "scenario file")->required();
    replay->add_option("--out", out_dir, "directory holding a previous run")->required();

    std::string inventory_file, kb_file, methods_file, fallback = "f4";
    CLI::App* probe =
        app.add_subcommand("probe", "select memory access methods for an inventory");
    probe->add_option("--inventory", inventory_file, "memory inventory listing")->required();
    probe->add_option("--kb", kb_file, "failure-behavior knowledge base")->required();
    probe->add_option("--methods", methods_file, "access-method catalog")->required();
    probe->add_option("--default", fallback, "fallback behavior on knowledge-base miss");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario_file, out_dir);
        if (replay->parsed())
            return cmd_replay_check(scenario_file, out_dir);
        if (probe->parsed())
            return cmd_probe(inventory_file, kb_file, methods_file, fallback);
    } catch (const aft::probe::NoToleratingMethod& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const aft::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 1;
}
