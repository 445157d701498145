// eprsim command-line harness: runs the named experiment from a JSON
// config, writes JSON/CSV artifacts, and prints a one-line summary.
// Exit codes: 0 success, 2 config error, 3 physics-invariant failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "eprsim/runner.hpp"

namespace {

struct SubOpts {
    CLI::App* cmd = nullptr;
    std::string name;
    std::string config_path;
    std::string input;  // .seq file for compile/lint
    std::int64_t seed = -1;
    std::int64_t shots = -1;
    int workers = 0;
    std::string out_dir;
    std::string format;
};

void add_common(SubOpts& sub) {
    sub.cmd->add_option("--config", sub.config_path, "JSON config file");
    sub.cmd->add_option("--seed", sub.seed,
                        "Random seed (mandatory when shots > 0)");
    sub.cmd->add_option("--shots", sub.shots, "Monte Carlo shots (0 = analytic)");
    sub.cmd->add_option("--workers", sub.workers,
                        "Worker threads (default: EPRSIM_WORKERS or hardware)");
    sub.cmd->add_option("--out", sub.out_dir, "Output directory");
    sub.cmd->add_option("--format", sub.format, "Artifact format: json, csv, or both")
        ->check(CLI::IsMember({"json", "csv", "both"}));
}

int emit(const eprsim::RunArtifacts& artifacts) {
    for (const auto& line : artifacts.printed_lines) {
        std::cout << line << '\n';
    }
    if (artifacts.exit_code != eprsim::exit_ok) {
        if (!artifacts.summary.empty()) {
            std::cout << artifacts.summary << '\n';
        }
        std::cerr << "eprsim: " << artifacts.error << '\n';
        return artifacts.exit_code;
    }
    try {
        eprsim::write_artifacts(artifacts);
    } catch (const std::exception& e) {
        std::cerr << "eprsim: " << e.what() << '\n';
        return eprsim::exit_config_error;
    }
    std::cout << artifacts.summary << '\n';
    return eprsim::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eprsim: entangled atom-pair protocol simulator"};
    app.require_subcommand(1);

    std::vector<SubOpts> subs(8);
    const char* names[] = {"chsh", "wigner", "fringes", "epr",
                           "ghz",  "gates-verify", "compile", "lint"};
    const char* descriptions[] = {
        "CHSH Bell test on the spin singlet",
        "Wigner three-setting Bell test",
        "Two-atom interferometer fringe scan over the path state",
        "Continuous-variable EPR conditional-variance inference",
        "Hyperentangled GHZ correlators and collapse demo",
        "Verify both addressed-gate schemes against the ideal rotation",
        "Parse, lint, and lower a .seq file to a schedule",
        "Parse and lint a .seq file, printing diagnostics",
    };
    for (int i = 0; i < 8; ++i) {
        subs[i].name = names[i];
        subs[i].cmd = app.add_subcommand(names[i], descriptions[i]);
        if (subs[i].name == "compile" || subs[i].name == "lint") {
            subs[i].cmd->add_option("input", subs[i].input, "Input .seq file")
                ->required();
        }
        add_common(subs[i]);
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& sub : subs) {
        if (!sub.cmd->parsed()) {
            continue;
        }
        eprsim::RunOverrides overrides;
        if (sub.seed >= 0) {
            overrides.seed = static_cast<std::uint64_t>(sub.seed);
        }
        if (sub.shots >= 0) {
            overrides.shots = static_cast<std::uint64_t>(sub.shots);
        }
        if (sub.workers > 0) {
            overrides.workers = static_cast<unsigned>(sub.workers);
        }
        if (!sub.out_dir.empty()) {
            overrides.out_dir = sub.out_dir;
        }
        if (!sub.format.empty()) {
            overrides.format = sub.format;
        }
        if (sub.name == "compile" || sub.name == "lint") {
            nlohmann::ordered_json config = eprsim::default_config(sub.name);
            config[sub.name] = {{"input", sub.input}};
            return emit(eprsim::run_experiment(config, overrides));
        }
        return emit(eprsim::run_experiment_file(sub.config_path, sub.name, overrides));
    }
    return eprsim::exit_config_error;
}
