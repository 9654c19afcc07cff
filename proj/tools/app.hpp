#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "lightfr/discrete.hpp"

namespace lightfr::app {

struct ExperimentConfig {
    std::string data_path;
    std::string data_format = "whitespace";
    /// Label used in summaries; defaults to the data file's stem.
    std::string dataset_name;
    /// lightfr | lightfr_para | lightfr_init | random | fedmf_real
    std::string model = "lightfr";
    HyperParams hp;
    /// Real-valued models.
    std::size_t real_f = 32;
    double eta = 0.01;
    double mf_lambda = 0.01;
    std::size_t mf_epochs = 50;
    std::size_t negatives = 99;
    std::size_t k = 10;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
    std::size_t eval_every = 0;
    std::size_t patience = 0;
    bool checkpoints = false;

    /// Throws unless the seed is set and the model is known.
    void validate() const;
};

/// Keys mirror the field names; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::ordered_json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lightfr::app
