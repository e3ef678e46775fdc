#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "demandcast/features.hpp"
#include "demandcast/model.hpp"
#include "demandcast/tuning.hpp"

namespace demandcast::cli {

enum ExitCode : int { kSuccess = 0, kInternalError = 1, kInputError = 2 };

/// Declarative run settings loaded from a JSON config file. Paths are resolved
/// against the config file's directory; command-line flags override every field.
struct RunConfig {
    std::string sales;
    std::string covid;
    std::string holidays;
    std::string scenario;
    std::string checkpoint;
    std::string output_dir = ".";

    int horizon = 90;
    double level = 0.8;
    std::uint64_t seed = 0;
    int samples = 1000;
    int threads = 1;
    int budget = 40;
    bool clamp_negative = false;

    std::optional<int> cv_initial_train_days;
    int cv_period_days = 30;
    int cv_horizon_days = 90;
    int monthly_buckets = 3;

    SeasonWindows windows;
    ModelConfig model;
    SearchSpace search_space;
    std::map<std::string, Hyperparameters> presets;
};

/// The shipped named hyperparameter sets, keyed by SKU.
const std::map<std::string, Hyperparameters>& builtin_presets();

RunConfig parse_config(std::string_view json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

std::string write_params(const Hyperparameters& hp, const std::string& sku, std::optional<double> cv_mape = {},
                         std::optional<int> trial = {});
Hyperparameters parse_params(std::string_view json_text);

/// Runs one command. `args` excludes the program name.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace demandcast::cli
