// Command-line front end: run configurations or named presets of the three
// Cahn-Hilliard-type models, list the preset catalog, and print the profile
// constants table.
//
// Exit codes: 0 success, 2 configuration error, 3 instability, 4 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chsim/config.hpp"
#include "chsim/diagnostics.hpp"
#include "chsim/presets.hpp"
#include "chsim/runner.hpp"

namespace {

int run_document(nlohmann::json doc, const std::vector<std::string>& overrides,
                 const std::string& out_dir, const std::optional<std::string>& resume) {
    for (const std::string& o : overrides) chsim::apply_override(doc, o);
    if (!out_dir.empty()) doc["output"]["dir"] = out_dir;
    chsim::RunConfig cfg = chsim::parse_config(doc);
    chsim::RunOutcome outcome = chsim::run(cfg, resume);
    if (outcome.status == 0)
        std::fprintf(stderr, "chsim: done, %ld steps, outputs in %s\n", outcome.final_step,
                     cfg.output.dir.c_str());
    return outcome.status;
}

void print_constants(const std::string& mobility, double tolerance) {
    const chsim::MobilityKind kind = mobility == "quadratic"
                                         ? chsim::MobilityKind::Quadratic
                                         : chsim::MobilityKind::Quartic;
    const chsim::ProfileConstants c = chsim::constants_oracle(kind, tolerance);
    std::printf("mobility        %s\n", mobility.c_str());
    std::printf("c_W             %.12g\n", c.c_W);
    std::printf("c_M             %.12g\n", c.c_M);
    std::printf("c_N             %.12g\n", c.c_N);
    std::printf("velocity_factor %.12g\n", c.velocity_factor);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier-spectral Cahn-Hilliard simulator (classical, degenerate-mobility "
                 "and two-mobility models)"};
    app.require_subcommand(1);

    // run <config>
    std::string config_path, run_out;
    std::optional<std::string> resume;
    std::vector<std::string> run_overrides;
    CLI::App* cmd_run = app.add_subcommand("run", "Run a JSON configuration file");
    cmd_run->add_option("config", config_path, "Path to the configuration document")
        ->required();
    cmd_run->add_option("--out", run_out, "Override the output directory");
    cmd_run->add_option("--override", run_overrides,
                        "Override a config entry, e.g. model.alpha=2 (repeatable)");
    std::string resume_path;
    cmd_run->add_option("--resume", resume_path, "Continue from a CHF1 snapshot file");

    // preset <name>
    std::string preset_name, preset_out;
    std::vector<std::string> preset_overrides;
    bool preset_print = false;
    CLI::App* cmd_preset = app.add_subcommand("preset", "Run a named preset");
    cmd_preset->add_option("name", preset_name, "Preset name, e.g. fiveballs2d-nmn")
        ->required();
    cmd_preset->add_option("--out", preset_out, "Override the output directory");
    cmd_preset->add_option("--override", preset_overrides,
                           "Override a config entry, e.g. schedule.steps=100 (repeatable)");
    cmd_preset->add_flag("--print", preset_print, "Print the preset config instead of running");

    // presets
    CLI::App* cmd_presets = app.add_subcommand("presets", "List the preset catalog");

    // constants
    std::string mobility = "quartic";
    double tolerance = 1e-10;
    CLI::App* cmd_constants =
        app.add_subcommand("constants", "Print the transition-profile constants table");
    cmd_constants->add_option("--mobility", mobility, "quartic (s^2(1-s)^2) or quadratic (s(1-s))")
        ->check(CLI::IsMember({"quartic", "quadratic"}));
    cmd_constants->add_option("--tolerance", tolerance, "Quadrature tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_run->parsed()) {
            std::ifstream is(config_path);
            if (!is) throw chsim::IoError("cannot open config file: " + config_path);
            std::stringstream buf;
            buf << is.rdbuf();
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(buf.str(), nullptr, true, true);
            } catch (const nlohmann::json::parse_error& e) {
                throw chsim::ConfigError(std::string("config: invalid JSON: ") + e.what());
            }
            if (!resume_path.empty()) resume = resume_path;
            return run_document(std::move(doc), run_overrides, run_out, resume);
        }
        if (cmd_preset->parsed()) {
            nlohmann::json doc = chsim::preset_config(preset_name);
            if (preset_print) {
                for (const std::string& o : preset_overrides) chsim::apply_override(doc, o);
                std::printf("%s\n", doc.dump(2).c_str());
                return 0;
            }
            return run_document(std::move(doc), preset_overrides, preset_out, std::nullopt);
        }
        if (cmd_presets->parsed()) {
            for (const chsim::PresetInfo& p : chsim::list_presets())
                std::printf("%-18s %s\n", p.name.c_str(), p.description.c_str());
            return 0;
        }
        if (cmd_constants->parsed()) {
            print_constants(mobility, tolerance);
            return 0;
        }
    } catch (const chsim::ConfigError& e) {
        std::fprintf(stderr, "chsim: %s\n", e.what());
        return 2;
    } catch (const chsim::InstabilityError& e) {
        std::fprintf(stderr, "chsim: %s\n", e.what());
        return 3;
    } catch (const chsim::IoError& e) {
        std::fprintf(stderr, "chsim: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "chsim: %s\n", e.what());
        return 1;
    }
    return 0;
}
