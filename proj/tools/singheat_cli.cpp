#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "singheat/errors.hpp"
#include "singheat/experiments.hpp"
#include "singheat/io.hpp"

namespace {

using nlohmann::json;

/// Manifest for runs that fail before an experiment starts.
void write_error_manifest(const std::string& dir, const std::string& experiment, const std::string& kind,
                          const std::string& message, int code) {
    nlohmann::ordered_json m;
    m["status"] = "error";
    m["exit_code"] = code;
    m["error"] = {{"kind", kind}, {"message", message}};
    m["config"] = {{"experiment", experiment}};
    m["artifacts"] = json::array();
    m["invariants"] = json::array();
    try {
        singheat::io::write_file(std::filesystem::path(dir) / "manifest.json", m.dump(2) + "\n");
    } catch (const std::exception&) {
        // the error itself is still reported on stderr
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments for the heat equation with an inverse-square boundary potential"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir;
    for (const auto& name : singheat::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--set", sets, "override one configuration key, key=value (repeatable)");
        sub->add_option("--out", out_dir, "output directory (overrides out_dir)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();

    json raw = json::object();
    std::string manifest_dir = out_dir.empty() ? "out" : out_dir;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            try {
                raw = json::parse(in);
            } catch (const json::exception& e) {
                throw singheat::Error(singheat::ErrorKind::InvalidConfig,
                                      "configuration file is not valid JSON: " + std::string(e.what()));
            }
            if (!raw.is_object()) {
                throw singheat::Error(singheat::ErrorKind::InvalidConfig, "configuration must be a JSON object");
            }
        }
        if (raw.contains("experiment") && raw["experiment"] != experiment) {
            throw singheat::Error(singheat::ErrorKind::InvalidConfig,
                                  "configuration is for experiment " + raw["experiment"].dump() +
                                      ", not '" + experiment + "'");
        }
        raw["experiment"] = experiment;
        singheat::apply_overrides(raw, sets);
        if (!out_dir.empty()) raw["out_dir"] = out_dir;
        if (out_dir.empty() && raw.contains("out_dir") && raw["out_dir"].is_string()) {
            manifest_dir = raw["out_dir"].get<std::string>();
        }
        const auto config = singheat::config_from_json(raw);
        const auto rec = singheat::run_experiment(config);
        std::cout << experiment << ": " << rec.status << '\n';
        for (const auto& [name, ok] : rec.invariants) std::cout << (ok ? "  pass  " : "  FAIL  ") << name << '\n';
        for (const auto& a : rec.artifacts) std::cout << "  wrote " << (std::filesystem::path(config.out_dir) / a).string() << '\n';
        if (rec.status == "error") std::cerr << "error: " << rec.error_message << '\n';
        return rec.exit_code;
    } catch (const singheat::Error& e) {
        const int code = singheat::exit_code_for(e.kind());
        std::cerr << "error: " << e.what() << '\n';
        write_error_manifest(manifest_dir, experiment, singheat::to_string(e.kind()), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        write_error_manifest(manifest_dir, experiment, "internal", e.what(), 3);
        return 3;
    }
}
