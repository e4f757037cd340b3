#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpem/scenario.hpp"

namespace vpem {

struct PhiGrid {
  double min = -0.01;
  double max = 0.01;
  int count = 21;
  bool exclude_zero = false;  // offset grid that straddles but never hits 0

  std::vector<double> values() const;
  bool operator==(const PhiGrid&) const = default;
};

struct ReferenceSpec {
  enum class Kind { Fixed, Optimal, AveragedOptimal, Contrast };
  Kind kind = Kind::Fixed;
  double phi0 = 0.0;    // Fixed / Contrast
  double delta0 = 0.0;  // Optimal
  double delta1 = 0.0;  // AveragedOptimal
  double delta2 = 0.0;

  bool operator==(const ReferenceSpec&) const = default;
};

struct EmitSpec {
  std::string dir = "out";
  std::string basename = "run";
  bool operator==(const EmitSpec&) const = default;
};

/// One experiment: probe + noise strengths (direct or via dominant-eigenvalue
/// targets) + mitigation orders + phase grid + reference policy + sampling.
struct ScenarioConfig {
  int schema_version = 1;
  ProbeSpec probe;
  NoiseKind::Kind noise = NoiseKind::Kind::PhaseDiffusion;
  std::vector<double> deltas;
  std::vector<double> lambda_targets;
  std::vector<int> orders{1};
  PhiGrid phi_grid;
  ReferenceSpec reference;
  int cutoff = 6;
  double trace_tolerance = 1e-10;
  ChannelRoute route = ChannelRoute::Auto;
  long long samples = 10'000'000;
  std::vector<std::uint64_t> seeds;
  EmitSpec emit;

  void validate() const;  // throws ConfigError with the offending field
  Scenario scenario() const;

  std::string to_json_text() const;
  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig load(const std::string& path);

  bool operator==(const ScenarioConfig&) const = default;
};

}  // namespace vpem
