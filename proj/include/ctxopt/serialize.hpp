#pragma once

#include <filesystem>
#include <string>

#include "ctxopt/harness.hpp"

namespace ctxopt {

std::string base_name(BaseFunction base);
BaseFunction base_from_name(const std::string& name);
std::string shift_name(ShiftType shift);
ShiftType shift_from_name(const std::string& name);

/// Read an experiment config from JSON. "base" and "shift" are required;
/// every other key falls back to the defaults for that base function.
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json_string(const ExperimentConfig& config);

void save_dataset(const std::filesystem::path& path,
                  const ExperimentConfig& config, const Matrix& shift_matrix,
                  const ContextDataset& data);

struct LoadedDataset {
  ContextDataset data;
  Matrix shift_matrix;
};

LoadedDataset load_dataset(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const MogprModel& model);
MogprModel load_model(const std::filesystem::path& path);

void save_policy(const std::filesystem::path& path, const LinearPolicy& policy,
                 std::uint64_t seed);
LinearPolicy load_policy(const std::filesystem::path& path);

}  // namespace ctxopt
