#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "singheat/errors.hpp"
#include "singheat/mesh.hpp"

namespace singheat {

/// One experiment run. Optional fields take experiment-specific defaults when
/// the configuration leaves them out; resolve_defaults fills them in.
struct ExperimentConfig {
    std::string experiment;
    std::optional<std::size_t> mesh_n;
    std::optional<std::size_t> nt;
    double T = 0.5;
    std::optional<double> mu;
    std::vector<double> mu_list{0.0, 0.25};        ///< hardy
    std::vector<double> gamma_list{1.5};           ///< hardy
    std::vector<std::size_t> mesh_sizes;           ///< hardy A1 sweep; empty: n/4, n/2, n
    std::string reg = "auto";                      ///< control: auto, none, shift, quadratic
    double reg_param = 0.0;                        ///< shift m (0: n + 1) or quadratic eps
    double eps = 0.05;                             ///< spectrum
    std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};  ///< blowup, stabilize
    std::vector<double> betas{0.1, 0.2};
    std::vector<double> shift_list{10, 20, 40, 80};  ///< observability
    double gamma = 1.5;
    double A1 = 1.0;  ///< Hardy remainder coefficient in the Carleman left side
    double penalty = 1e-8;
    double cg_tol = 1e-10;
    std::size_t cg_max_iter = 1000;
    Interval omega{0.3, 0.7};
    Interval omega0{0.4, 0.6};
    double r0 = 0.1;
    double lambda = 2.0;
    std::vector<double> lambda_grid{2, 5, 10, 20, 50};
    double varpi0_target = 1.0;
    double theta_power = 3.0;
    double R = 0.0;  ///< Carleman amplitude; 0: doubling search
    std::size_t samples = 100000;
    std::size_t runs = 20;
    std::size_t ct_iters = 30;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
};

const std::vector<std::string>& experiment_names();

/// Parses a JSON object. Throws UnknownKey listing every unrecognized key,
/// UnknownExperiment for a bad experiment name, InvalidConfig for bad values.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Reads and parses a JSON file; InvalidConfig when unreadable or not an object.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies "key=value" overrides; the value is parsed as JSON, falling back to a string.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& sets);

/// Fills experiment-specific defaults and re-validates module preconditions.
ExperimentConfig resolve_defaults(ExperimentConfig c);
nlohmann::ordered_json config_to_json(const ExperimentConfig& c);

struct RunRecord {
    nlohmann::ordered_json config;
    std::string started;
    std::string finished;
    std::string status = "ok";  ///< ok, invariant_failure, error
    std::optional<ErrorKind> error_kind;
    std::string error_message;
    std::vector<std::string> artifacts;
    std::vector<std::pair<std::string, bool>> invariants;
    int exit_code = 0;
};

/// 2 for configuration errors, 1 for property failures, 3 for numerical failures.
int exit_code_for(ErrorKind k);

/// Runs the experiment, writes its artifacts and manifest.json into out_dir.
/// The manifest is written even when the run fails.
RunRecord run_experiment(const ExperimentConfig& config);

}  // namespace singheat
