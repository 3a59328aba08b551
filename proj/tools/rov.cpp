// rov: scenario runner, live session server, and protocol debugging aid.
//
//   rov sim run --scenario <file|builtin> [--seed N] [--out log.csv] [--metrics]
//   rov sim serve [--tcp-port 7700] [--ws-port 7780] [--scenario <file|builtin>] [--realtime]
//   rov sim list
//   rov proto decode <hexfile>
//
// Exit codes: 0 success, 2 scenario error, 3 simulation diverged.

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rov/harness.hpp"
#include "rov/json_mirror.hpp"
#include "rov/server.hpp"

namespace {

constexpr int kExitScenario = 2;
constexpr int kExitDiverged = 3;

using nlohmann::json;

json metrics_json(const rov::RunLog& log) {
    json steps = json::array();
    for (auto channel : {rov::StepChannel::yaw, rov::StepChannel::depth}) {
        for (double t : rov::detect_steps(log, channel)) {
            const auto m = rov::compute_step_metrics(log, channel, t);
            steps.push_back({{"channel", rov::to_string(channel)},
                             {"step_time", m.step_time},
                             {"magnitude", m.magnitude},
                             {"settling_time", std::isinf(m.settling_time) ? json(nullptr)
                                                                            : json(m.settling_time)},
                             {"settled", !std::isinf(m.settling_time)},
                             {"overshoot_pct", m.overshoot},
                             {"sse", m.sse}});
        }
    }
    return {{"scenario", log.scenario},
            {"seed", log.seed},
            {"ticks", log.rows.size()},
            {"commands_applied", log.stats.commands_applied},
            {"commands_rejected", log.stats.commands_rejected},
            {"uplink_decode_errors", log.stats.uplink_decode_errors},
            {"telemetry_received", log.stats.telemetry_received},
            {"steps", steps}};
}

std::vector<std::uint8_t> read_hex_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rov::InvalidInput("cannot open '" + path + "'");
    std::string digits;
    char c;
    while (in.get(c)) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (!std::isxdigit(static_cast<unsigned char>(c)))
            throw rov::InvalidInput(std::string("non-hex character '") + c + "' in " + path);
        digits.push_back(c);
    }
    if (digits.size() % 2) throw rov::InvalidInput("odd number of hex digits in " + path);
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < digits.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(std::stoi(digits.substr(i, 2), nullptr, 16)));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ROV hardware-in-the-loop simulator"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("sim", "Simulation commands");
    sim->require_subcommand(1);

    std::string run_scenario_name;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    bool metrics = false;
    auto* run = sim->add_subcommand("run", "Run a scenario in batch mode");
    run->add_option("--scenario", run_scenario_name, "Builtin name or scenario JSON file")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out_path, "Write the per-tick log as CSV");
    run->add_flag("--metrics", metrics, "Print run summary and step metrics as JSON");

    rov::ServeOptions serve_opts;
    std::string serve_scenario_name;
    double serve_duration = 0.0;
    auto* serve = sim->add_subcommand("serve", "Serve a live piloting session");
    serve->add_option("--tcp-port", serve_opts.tcp_port, "Raw protocol port")->capture_default_str();
    serve->add_option("--ws-port", serve_opts.ws_port, "WebSocket bridge port")->capture_default_str();
    serve->add_option("--bind", serve_opts.bind_address, "Listen address")->capture_default_str();
    serve->add_option("--scenario", serve_scenario_name, "Builtin name or scenario JSON file");
    serve->add_flag("--realtime", serve_opts.realtime, "Lock ticks to the wall clock");
    serve->add_option("--duration", serve_duration, "Stop after this many simulated seconds");

    auto* list = sim->add_subcommand("list", "List builtin scenarios");

    auto* proto_cmd = app.add_subcommand("proto", "Protocol tools");
    proto_cmd->require_subcommand(1);
    std::string hexfile;
    auto* decode = proto_cmd->add_subcommand("decode", "Decode a hex dump of tether bytes");
    decode->add_option("hexfile", hexfile, "File of hex digits (whitespace ignored)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            rov::Scenario scenario = rov::resolve_scenario(run_scenario_name);
            if (seed) {
                scenario.seed = *seed;
                scenario.noise.seed = *seed;
            }
            const rov::RunLog log = rov::run_scenario(scenario);
            if (!out_path.empty()) {
                std::ofstream out(out_path, std::ios::binary);
                if (!out) throw rov::Error("cannot write '" + out_path + "'");
                rov::write_csv(log, out);
            } else if (!metrics) {
                rov::write_csv(log, std::cout);
            }
            if (metrics) std::cout << metrics_json(log).dump(2) << '\n';
        } else if (*serve) {
            rov::Scenario scenario;
            scenario.name = "live";
            scenario.control.setpoints.mode = rov::ControlMode::manual;
            if (!serve_scenario_name.empty()) scenario = rov::resolve_scenario(serve_scenario_name);
            if (serve_duration > 0.0) serve_opts.duration = serve_duration;
            rov::serve(scenario, serve_opts);
        } else if (*list) {
            for (const auto& name : rov::builtin_scenario_names()) std::cout << name << '\n';
        } else if (*decode) {
            const auto bytes = read_hex_file(hexfile);
            const auto res = rov::proto::decode_stream(bytes);
            for (const auto& msg : res.messages) std::cout << rov::json_mirror::to_json(msg).dump() << '\n';
            for (const auto& err : res.errors)
                std::cerr << "error at byte " << err.offset << ": " << rov::proto::to_string(err.kind)
                          << " (" << err.detail << ")\n";
            if (!res.remainder.empty())
                std::cerr << res.remainder.size() << " trailing bytes (incomplete frame)\n";
        }
    } catch (const rov::SimulationDiverged& e) {
        std::cerr << "rov: simulation diverged: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const rov::ScenarioError& e) {
        std::cerr << "rov: scenario error: " << e.what() << '\n';
        return kExitScenario;
    } catch (const rov::InvalidConfig& e) {
        std::cerr << "rov: scenario error: " << e.what() << '\n';
        return kExitScenario;
    } catch (const std::exception& e) {
        std::cerr << "rov: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
