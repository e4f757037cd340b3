#include "vpem/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vpem {

using nlohmann::json;

std::vector<double> PhiGrid::values() const {
  std::vector<double> out;
  out.reserve(count);
  if (exclude_zero) {
    // cell midpoints: straddles zero symmetrically without containing it
    const double width = (max - min) / count;
    for (int i = 0; i < count; ++i) out.push_back(min + (i + 0.5) * width);
  } else {
    for (int i = 0; i < count; ++i)
      out.push_back(min + (max - min) * i / (count - 1));
  }
  return out;
}

void ScenarioConfig::validate() const {
  if (schema_version != 1) throw ConfigError("schema_version: unsupported (expected 1)");
  probe.validate(cutoff);
  if (deltas.empty() && lambda_targets.empty())
    throw ConfigError("noise: needs a delta list or lambda_targets");
  for (double d : deltas) {
    if (d < 0.0) throw ConfigError("noise.deltas: entries must be >= 0");
    if (noise == NoiseKind::Kind::PhotonLoss && d > 1.0)
      throw ConfigError("noise.deltas: loss rate must be in [0, 1]");
  }
  for (double t : lambda_targets)
    if (t <= 0.0 || t > 1.0) throw ConfigError("noise.lambda_targets: entries must be in (0, 1]");
  if (orders.empty()) throw ConfigError("orders: must be nonempty");
  for (int n : orders)
    if (n < 1) throw ConfigError("orders: entries must be >= 1");
  if (!(phi_grid.min < phi_grid.max)) throw ConfigError("phi_grid: min must be < max");
  if (phi_grid.count < 2) throw ConfigError("phi_grid.count: must be >= 2");
  if (reference.kind == ReferenceSpec::Kind::AveragedOptimal &&
      !(reference.delta1 < reference.delta2))
    throw ConfigError("reference: averaged_optimal needs delta1 < delta2");
  if (cutoff < 1) throw ConfigError("cutoff: must be >= 1");
  if (trace_tolerance <= 0.0 || trace_tolerance > 1e-2)
    throw ConfigError("trace_tolerance: must be in (0, 1e-2]");
  if (samples < 1) throw ConfigError("samples: must be >= 1");
  if (emit.basename.empty()) throw ConfigError("emit.basename: must be nonempty");
}

Scenario ScenarioConfig::scenario() const {
  Scenario s;
  s.probe = probe;
  s.noise = noise;
  s.cutoff = cutoff;
  s.trace_tolerance = trace_tolerance;
  s.route = route;
  return s;
}

namespace {

const char* route_name(ChannelRoute route) {
  switch (route) {
    case ChannelRoute::Auto: return "auto";
    case ChannelRoute::Analytic: return "analytic";
    case ChannelRoute::Numeric: return "numeric";
  }
  return "auto";
}

ChannelRoute route_from(const std::string& name) {
  if (name == "auto") return ChannelRoute::Auto;
  if (name == "analytic") return ChannelRoute::Analytic;
  if (name == "numeric") return ChannelRoute::Numeric;
  throw ConfigError("route: expected auto|analytic|numeric");
}

NoiseKind::Kind noise_from(const std::string& name) {
  if (name == "phase_diffusion") return NoiseKind::Kind::PhaseDiffusion;
  if (name == "photon_loss") return NoiseKind::Kind::PhotonLoss;
  if (name == "additive_gaussian") return NoiseKind::Kind::AdditiveGaussian;
  throw ConfigError("noise.kind: expected phase_diffusion|photon_loss|additive_gaussian");
}

const char* reference_name(ReferenceSpec::Kind kind) {
  switch (kind) {
    case ReferenceSpec::Kind::Fixed: return "fixed";
    case ReferenceSpec::Kind::Optimal: return "optimal";
    case ReferenceSpec::Kind::AveragedOptimal: return "averaged_optimal";
    case ReferenceSpec::Kind::Contrast: return "contrast";
  }
  return "fixed";
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

std::string ScenarioConfig::to_json_text() const {
  json j;
  j["schema_version"] = schema_version;
  if (probe.kind == ProbeKind::Noon) {
    j["probe"] = {{"kind", "noon"}, {"n", probe.noon_n}};
  } else {
    j["probe"] = {{"kind", "coherent_squeezed"},
                  {"n_coherent", probe.n_coherent},
                  {"n_squeezed", probe.n_squeezed}};
  }
  j["noise"]["kind"] = NoiseKind::name(noise);
  if (!deltas.empty()) j["noise"]["deltas"] = deltas;
  if (!lambda_targets.empty()) j["noise"]["lambda_targets"] = lambda_targets;
  j["orders"] = orders;
  j["phi_grid"] = {{"min", phi_grid.min},
                   {"max", phi_grid.max},
                   {"count", phi_grid.count},
                   {"exclude_zero", phi_grid.exclude_zero}};
  json ref;
  ref["kind"] = reference_name(reference.kind);
  switch (reference.kind) {
    case ReferenceSpec::Kind::Fixed:
    case ReferenceSpec::Kind::Contrast:
      ref["phi0"] = reference.phi0;
      break;
    case ReferenceSpec::Kind::Optimal:
      ref["delta0"] = reference.delta0;
      break;
    case ReferenceSpec::Kind::AveragedOptimal:
      ref["delta1"] = reference.delta1;
      ref["delta2"] = reference.delta2;
      break;
  }
  j["reference"] = ref;
  j["cutoff"] = cutoff;
  j["trace_tolerance"] = trace_tolerance;
  j["route"] = route_name(route);
  j["samples"] = samples;
  j["seeds"] = seeds;
  j["emit"] = {{"dir", emit.dir}, {"basename", emit.basename}};
  return j.dump(2) + "\n";
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: invalid JSON: ") + ex.what());
  }
  try {
    ScenarioConfig c;
    c.schema_version = field_or(j, "schema_version", 1);
    const json& probe = j.at("probe");
    const std::string probe_kind = probe.at("kind").get<std::string>();
    if (probe_kind == "noon") {
      c.probe.kind = ProbeKind::Noon;
      c.probe.noon_n = probe.at("n").get<int>();
      c.cutoff = c.probe.noon_n + 1;
      c.trace_tolerance = 1e-10;
    } else if (probe_kind == "coherent_squeezed") {
      c.probe.kind = ProbeKind::CoherentSqueezed;
      c.probe.n_coherent = probe.at("n_coherent").get<double>();
      c.probe.n_squeezed = probe.at("n_squeezed").get<double>();
      c.cutoff = 31;
      c.trace_tolerance = 1e-2;
    } else {
      throw ConfigError("probe.kind: expected noon|coherent_squeezed");
    }
    const json& noise = j.at("noise");
    c.noise = noise_from(noise.at("kind").get<std::string>());
    c.deltas = field_or(noise, "deltas", std::vector<double>{});
    c.lambda_targets = field_or(noise, "lambda_targets", std::vector<double>{});
    c.orders = field_or(j, "orders", std::vector<int>{1});
    if (j.contains("phi_grid")) {
      const json& grid = j.at("phi_grid");
      c.phi_grid.min = grid.at("min").get<double>();
      c.phi_grid.max = grid.at("max").get<double>();
      c.phi_grid.count = grid.at("count").get<int>();
      c.phi_grid.exclude_zero = field_or(grid, "exclude_zero", false);
    }
    if (j.contains("reference")) {
      const json& ref = j.at("reference");
      const std::string kind = ref.at("kind").get<std::string>();
      if (kind == "fixed") {
        c.reference.kind = ReferenceSpec::Kind::Fixed;
        c.reference.phi0 = field_or(ref, "phi0", 0.0);
      } else if (kind == "contrast") {
        c.reference.kind = ReferenceSpec::Kind::Contrast;
        c.reference.phi0 = ref.at("phi0").get<double>();
      } else if (kind == "optimal") {
        c.reference.kind = ReferenceSpec::Kind::Optimal;
        c.reference.delta0 = ref.at("delta0").get<double>();
      } else if (kind == "averaged_optimal") {
        c.reference.kind = ReferenceSpec::Kind::AveragedOptimal;
        c.reference.delta1 = ref.at("delta1").get<double>();
        c.reference.delta2 = ref.at("delta2").get<double>();
      } else {
        throw ConfigError("reference.kind: expected fixed|optimal|averaged_optimal|contrast");
      }
    }
    c.cutoff = field_or(j, "cutoff", c.cutoff);
    c.trace_tolerance = field_or(j, "trace_tolerance", c.trace_tolerance);
    c.route = route_from(field_or(j, "route", std::string("auto")));
    c.samples = field_or(j, "samples", static_cast<long long>(10'000'000));
    c.seeds = field_or(j, "seeds", std::vector<std::uint64_t>{});
    if (j.contains("emit")) {
      const json& emit = j.at("emit");
      c.emit.dir = field_or(emit, "dir", std::string("out"));
      c.emit.basename = field_or(emit, "basename", std::string("run"));
    }
    c.validate();
    return c;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

}  // namespace vpem
