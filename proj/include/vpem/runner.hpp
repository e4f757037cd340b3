#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vpem/config.hpp"

namespace vpem {

struct RunOptions {
  std::string out_dir;  // empty: use the config's emit.dir
  int threads = 0;      // 0: library default
  std::optional<std::uint64_t> seed_override;
  std::optional<int> cutoff_override;
  std::optional<long long> samples_override;
};

struct RunArtifacts {
  std::vector<std::string> files;
};

/// Executes a scenario config: one CSV record per (phi, delta, n, seed) with
/// exact bias^2, formula MSE and the sampled squared deviation. Deterministic
/// given the config; records are emitted sorted by key.
RunArtifacts run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Canonical figure pipelines with embedded configs.
RunArtifacts reproduce_figure(const std::string& name, const RunOptions& options = {});
const std::vector<std::string>& figure_names();

/// Resolves the configured reference policy per mitigation order.
RunArtifacts run_refpoint(const ScenarioConfig& config, const RunOptions& options = {});

/// Perturbation-series coefficients and leading bias orders at the resolved
/// reference points.
RunArtifacts run_coeffs(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace vpem
