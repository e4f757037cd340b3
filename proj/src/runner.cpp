#include "vpem/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include "vpem/estimation.hpp"
#include "vpem/parallel.hpp"
#include "vpem/quadrature.hpp"
#include "vpem/refpoint.hpp"
#include "vpem/rng.hpp"

namespace vpem {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Record {
  double phi = 0.0;
  double delta = 0.0;
  double lambda = 1.0;
  int n = 1;
  double phi0 = 0.0;
  double bias_sq = 0.0;
  double mse = 0.0;
  std::optional<double> est_sq;
  long long seed = -1;
};

bool record_key_less(const Record& a, const Record& b) {
  const auto key = [](const Record& r) {
    return std::make_tuple(r.phi, r.delta, r.n, r.phi0, r.seed);
  };
  return key(a) < key(b);
}

void write_records_csv(const fs::path& path, const std::vector<Record>& records) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot open output file " + path.string());
  out << "phi,delta,lambda_dominant,n,phi0,bias_sq_exact,mse_formula,est_sq_sampled,seed\n";
  for (const Record& r : records) {
    out << fmt17(r.phi) << ',' << fmt17(r.delta) << ',' << fmt17(r.lambda) << ',' << r.n << ','
        << fmt17(r.phi0) << ',' << fmt17(r.bias_sq) << ',' << fmt17(r.mse) << ','
        << (r.est_sq ? fmt17(*r.est_sq) : "nan") << ',' << r.seed << '\n';
  }
}

ScenarioConfig apply_overrides(ScenarioConfig config, const RunOptions& options) {
  if (options.cutoff_override) config.cutoff = *options.cutoff_override;
  if (options.samples_override) config.samples = *options.samples_override;
  if (options.seed_override) config.seeds = {*options.seed_override};
  if (!options.out_dir.empty()) config.emit.dir = options.out_dir;
  config.validate();
  return config;
}

std::vector<double> resolve_deltas(const ScenarioEngine& engine, const ScenarioConfig& config) {
  std::vector<double> deltas = config.deltas;
  for (double target : config.lambda_targets)
    deltas.push_back(delta_for_lambda(
        [&](double d) { return engine.dominant_lambda(d); }, target));
  return deltas;
}

ReferenceSearch default_search(const ScenarioConfig& config) {
  return config.probe.kind == ProbeKind::Noon ? ReferenceSearch::for_noon(config.probe.noon_n)
                                              : ReferenceSearch::for_coherent_squeezed();
}

double resolve_reference(const ScenarioEngine& engine, const ScenarioConfig& config, int n) {
  switch (config.reference.kind) {
    case ReferenceSpec::Kind::Fixed:
    case ReferenceSpec::Kind::Contrast:
      return config.reference.phi0;
    case ReferenceSpec::Kind::Optimal: {
      ReferenceSearch search = default_search(config);
      search.prior = Prior{Prior::Kind::PointMass, config.reference.delta0, 0.0, 0.0};
      return optimal_reference(engine, config.reference.delta0, n, search);
    }
    case ReferenceSpec::Kind::AveragedOptimal: {
      ReferenceSearch search = default_search(config);
      search.prior =
          Prior{Prior::Kind::Uniform, 0.0, config.reference.delta1, config.reference.delta2};
      return averaged_optimal_reference(engine, n, search);
    }
  }
  throw ConfigError("reference: unknown kind");
}

std::vector<Record> run_records(const ScenarioEngine& engine, const ScenarioConfig& config) {
  const std::vector<double> deltas = resolve_deltas(engine, config);
  const std::vector<double> grid = config.phi_grid.values();
  const int max_order = *std::max_element(config.orders.begin(), config.orders.end());
  engine.prepare(std::span<const double>(deltas.data(), deltas.size()), max_order);

  std::vector<double> phi0_by_order;
  for (int n : config.orders) phi0_by_order.push_back(resolve_reference(engine, config, n));

  // pseudo-seed -1 marks the no-sampling record
  std::vector<long long> seeds;
  if (config.seeds.empty())
    seeds.push_back(-1);
  else
    for (std::uint64_t s : config.seeds) seeds.push_back(static_cast<long long>(s));

  const std::size_t n_orders = config.orders.size();
  const std::size_t n_deltas = deltas.size();
  const std::size_t n_phi = grid.size();
  const std::size_t n_seeds = seeds.size();
  std::vector<Record> records(n_orders * n_deltas * n_phi * n_seeds);

  const std::string scenario_id = engine.scenario().id();
  parallel::parallel_for(records.size(), [&](std::size_t idx) {
    std::size_t rem = idx;
    const std::size_t si = rem % n_seeds;
    rem /= n_seeds;
    const std::size_t pi = rem % n_phi;
    rem /= n_phi;
    const std::size_t di = rem % n_deltas;
    const std::size_t oi = rem / n_deltas;

    const int n = config.orders[oi];
    const double delta = deltas[di];
    const double phi = grid[pi];
    const double phi0 = phi0_by_order[oi];
    const EstimatorKind kind = (n == 1) ? EstimatorKind::Error : EstimatorKind::Mitigated;
    const BiasReport report = mse(kind, engine, phi, phi0, delta, n, config.samples);

    Record rec;
    rec.phi = phi;
    rec.delta = delta;
    rec.lambda = report.lambda_dominant;
    rec.n = n;
    rec.phi0 = phi0;
    rec.bias_sq = report.bias_sq;
    rec.mse = report.mse;
    rec.seed = seeds[si];
    if (seeds[si] >= 0) {
      const auto resp = engine.responses(delta, n);
      const auto& ord = resp->order(n);
      const double theta = phi0 + phi;
      const Linearization lin_id =
          linearize([&](double t) { return engine.ideal().eval(t); }, phi0);
      const std::size_t grid_index = (oi * n_deltas + di) * n_phi + pi;
      const std::uint64_t derived =
          rng::derive_seed(static_cast<std::uint64_t>(seeds[si]), scenario_id, grid_index);
      double est = 0.0;
      if (n == 1) {
        std::mt19937_64 gen(derived);
        const double mean = rng::sample_outcome_mean(ord.z_a.eval(theta), config.samples, gen);
        est = estimate(EstimatorKind::Error, mean, lin_id);
      } else {
        const long long per_circuit = config.samples / (2 * n);
        const CircuitShots shots =
            sample_circuits_from(ord.z_a.eval(theta), ord.z_i, n, per_circuit, derived);
        est = estimate_mitigated_from_shots(shots, lin_id.x, lin_id.y);
      }
      rec.est_sq = (est - phi) * (est - phi);
    }
    records[idx] = rec;
  });
  std::sort(records.begin(), records.end(), record_key_less);
  return records;
}

fs::path ensure_out_dir(const ScenarioConfig& config) {
  fs::path dir(config.emit.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create output directory " + dir.string());
  return dir;
}

}  // namespace

RunArtifacts run_scenario(const ScenarioConfig& raw_config, const RunOptions& options) {
  if (options.threads > 0) parallel::set_threads(options.threads);
  const ScenarioConfig config = apply_overrides(raw_config, options);
  const ScenarioEngine engine(config.scenario());
  const std::vector<Record> records = run_records(engine, config);

  const fs::path dir = ensure_out_dir(config);
  RunArtifacts artifacts;
  const fs::path csv = dir / (config.emit.basename + ".csv");
  write_records_csv(csv, records);
  artifacts.files.push_back(csv.string());
  const fs::path cfg = dir / (config.emit.basename + "_config.json");
  std::ofstream out(cfg);
  if (!out) throw Error("io", "cannot open output file " + cfg.string());
  out << config.to_json_text();
  artifacts.files.push_back(cfg.string());
  return artifacts;
}

// ---- figures ---------------------------------------------------------------------

namespace {

ScenarioConfig figure_base(ProbeKind probe, NoiseKind::Kind noise) {
  ScenarioConfig c;
  if (probe == ProbeKind::Noon) {
    c.probe = ProbeSpec{ProbeKind::Noon, 5, 0.0, 0.0};
    c.cutoff = 6;
    c.trace_tolerance = 1e-10;
  } else {
    c.probe = ProbeSpec{ProbeKind::CoherentSqueezed, 0, 2.5, 2.5};
    c.cutoff = 31;
    c.trace_tolerance = 1e-2;
  }
  c.noise = noise;
  c.lambda_targets = {0.9, 0.85, 0.8};
  c.phi_grid = PhiGrid{-0.01, 0.01, 21, false};
  c.samples = 10'000'000;
  c.seeds = {1};
  return c;
}

void write_contour_csv(const fs::path& path, const ContourSurface& surface) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot open output file " + path.string());
  out << "delta\\phi0";
  for (double phi0 : surface.phi0_grid) out << ',' << fmt17(phi0);
  out << '\n';
  for (std::size_t row = 0; row < surface.delta_grid.size(); ++row) {
    out << fmt17(surface.delta_grid[row]);
    for (std::size_t col = 0; col < surface.phi0_grid.size(); ++col)
      out << ',' << fmt17(std::log10(surface.values(static_cast<Eigen::Index>(row),
                                                    static_cast<Eigen::Index>(col))));
    out << '\n';
  }
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

RunArtifacts figure_bias_curves(const std::string& name, ScenarioConfig main_config,
                                std::optional<ScenarioConfig> contrast_config,
                                const RunOptions& options) {
  main_config.emit.basename = name;
  const ScenarioConfig config = apply_overrides(main_config, options);
  const ScenarioEngine engine(config.scenario());
  std::vector<Record> records = run_records(engine, config);
  if (contrast_config) {
    contrast_config->emit.basename = name;
    const ScenarioConfig contrast = apply_overrides(*contrast_config, options);
    const std::vector<Record> extra = run_records(engine, contrast);
    records.insert(records.end(), extra.begin(), extra.end());
    std::sort(records.begin(), records.end(), record_key_less);
  }
  const fs::path dir = ensure_out_dir(config);
  RunArtifacts artifacts;
  const fs::path csv = dir / (name + ".csv");
  write_records_csv(csv, records);
  artifacts.files.push_back(csv.string());

  if (name == "cs-loss") {
    // dominance classification: where the unmitigated bias error is smallest
    const fs::path dom = dir / (name + "_dominance.csv");
    std::ofstream out(dom);
    if (!out) throw Error("io", "cannot open output file " + dom.string());
    out << "phi,delta,be_sq,bmit2_sq,bmit3_sq,smallest\n";
    std::map<std::pair<double, double>, std::map<int, double>> cells;
    for (const Record& r : records)
      if (r.seed == records.front().seed) cells[{r.phi, r.delta}][r.n] = r.bias_sq;
    for (const auto& [key, by_order] : cells) {
      if (!by_order.count(1) || !by_order.count(2) || !by_order.count(3)) continue;
      const double be = by_order.at(1), b2 = by_order.at(2), b3 = by_order.at(3);
      out << fmt17(key.first) << ',' << fmt17(key.second) << ',' << fmt17(be) << ','
          << fmt17(b2) << ',' << fmt17(b3) << ','
          << (be < std::min(b2, b3) ? "error" : "mitigated") << '\n';
    }
    artifacts.files.push_back(dom.string());
  }
  return artifacts;
}

RunArtifacts figure_contour(const std::string& name, const RunOptions& options) {
  const bool loss = name == "contour-loss";
  ScenarioConfig config = figure_base(ProbeKind::CoherentSqueezed,
                                      loss ? NoiseKind::Kind::PhotonLoss
                                           : NoiseKind::Kind::AdditiveGaussian);
  config.emit.basename = name;
  config.deltas = {0.0};
  config.lambda_targets.clear();
  const ScenarioConfig resolved = apply_overrides(config, options);
  const ScenarioEngine engine(resolved.scenario());
  const double delta_hi = loss ? 0.15 : 0.26;
  const std::vector<double> delta_grid = linspace(0.0, delta_hi, 31);
  const std::vector<double> phi0_grid = linspace(0.0, 0.6, 61);
  const fs::path dir = ensure_out_dir(resolved);
  RunArtifacts artifacts;
  for (int n : {1, 2}) {
    const ContourSurface surface = contour_surface(engine, phi0_grid, delta_grid, n);
    const fs::path csv = dir / (name + "_n" + std::to_string(n) + ".csv");
    write_contour_csv(csv, surface);
    artifacts.files.push_back(csv.string());
  }
  return artifacts;
}

}  // namespace

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"noon-phase",  "noon-loss",
                                                 "cs-loss",     "cs-gaussian",
                                                 "contour-loss", "contour-gaussian"};
  return names;
}

RunArtifacts reproduce_figure(const std::string& name, const RunOptions& options) {
  if (options.threads > 0) parallel::set_threads(options.threads);
  const double pi = std::numbers::pi;
  if (name == "noon-phase" || name == "noon-loss") {
    const auto noise = (name == "noon-phase") ? NoiseKind::Kind::PhaseDiffusion
                                              : NoiseKind::Kind::PhotonLoss;
    ScenarioConfig main_config = figure_base(ProbeKind::Noon, noise);
    main_config.orders = {1, 2, 3};
    main_config.reference = ReferenceSpec{ReferenceSpec::Kind::Optimal, 0.0, 0.05, 0.0, 0.0};
    ScenarioConfig contrast = main_config;
    contrast.orders = {2, 3};
    contrast.reference = ReferenceSpec{ReferenceSpec::Kind::Contrast, pi / 12.0, 0.0, 0.0, 0.0};
    return figure_bias_curves(name, main_config, contrast, options);
  }
  if (name == "cs-loss" || name == "cs-gaussian") {
    const bool loss = name == "cs-loss";
    ScenarioConfig main_config = figure_base(
        ProbeKind::CoherentSqueezed,
        loss ? NoiseKind::Kind::PhotonLoss : NoiseKind::Kind::AdditiveGaussian);
    main_config.orders = loss ? std::vector<int>{1, 2, 3} : std::vector<int>{1, 2};
    // prior upper end: the noise strength whose dominant eigenvalue is 0.8
    const ScenarioEngine probe_engine(main_config.scenario());
    const double delta2 =
        delta_for_lambda([&](double d) { return probe_engine.dominant_lambda(d); }, 0.8);
    main_config.reference =
        ReferenceSpec{ReferenceSpec::Kind::AveragedOptimal, 0.0, 0.0, 0.0, delta2};
    std::optional<ScenarioConfig> contrast;
    if (!loss) {
      contrast = main_config;
      contrast->orders = {2};
      contrast->reference =
          ReferenceSpec{ReferenceSpec::Kind::Contrast, pi / 30.0, 0.0, 0.0, 0.0};
    }
    return figure_bias_curves(name, main_config, contrast, options);
  }
  if (name == "contour-loss" || name == "contour-gaussian") return figure_contour(name, options);
  throw ConfigError("figure: unknown name '" + name + "' (see `vpemsim figure --list`)");
}

// ---- reference points and series -----------------------------------------------

RunArtifacts run_refpoint(const ScenarioConfig& raw_config, const RunOptions& options) {
  if (options.threads > 0) parallel::set_threads(options.threads);
  const ScenarioConfig config = apply_overrides(raw_config, options);
  const ScenarioEngine engine(config.scenario());
  const fs::path dir = ensure_out_dir(config);
  const fs::path csv = dir / (config.emit.basename + "_refpoints.csv");
  std::ofstream out(csv);
  if (!out) throw Error("io", "cannot open output file " + csv.string());
  out << "n,phi0_opt,objective\n";
  for (int n : config.orders) {
    const double phi0 = resolve_reference(engine, config, n);
    double objective = 0.0;
    if (config.reference.kind == ReferenceSpec::Kind::Optimal) {
      objective = zeroth_order_objective(engine, phi0, config.reference.delta0, n).value_or(
          std::numeric_limits<double>::quiet_NaN());
    } else if (config.reference.kind == ReferenceSpec::Kind::AveragedOptimal) {
      const auto rule = quadrature::gauss_legendre(41, config.reference.delta1,
                                                   config.reference.delta2);
      double acc = 0.0;
      for (int q = 0; q < rule.size(); ++q)
        acc += rule.weights[q] *
               zeroth_order_objective(engine, phi0, rule.nodes[q], n).value_or(0.0);
      objective = acc / (config.reference.delta2 - config.reference.delta1);
    }
    out << n << ',' << fmt17(phi0) << ',' << fmt17(objective) << '\n';
  }
  return RunArtifacts{{csv.string()}};
}

RunArtifacts run_coeffs(const ScenarioConfig& raw_config, const RunOptions& options) {
  if (options.threads > 0) parallel::set_threads(options.threads);
  const ScenarioConfig config = apply_overrides(raw_config, options);
  const ScenarioEngine engine(config.scenario());
  const std::vector<double> deltas = resolve_deltas(engine, config);
  const double delta_max = *std::max_element(deltas.begin(), deltas.end());
  if (delta_max <= 0.0)
    throw ConfigError("coeffs: need a positive noise strength to expand around");
  const int max_order = std::max(2, *std::max_element(config.orders.begin(), config.orders.end()));

  const double lo = std::min(1e-4, delta_max / 40.0);
  const double hi = delta_max / 4.0;
  const int points = 4 * max_order + 5;
  std::vector<double> grid;
  for (int i = 0; i < points; ++i)
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));

  const fs::path dir = ensure_out_dir(config);
  const fs::path coeffs_csv = dir / (config.emit.basename + "_coeffs.csv");
  const fs::path leading_csv = dir / (config.emit.basename + "_leading.csv");
  std::ofstream coeffs_out(coeffs_csv);
  std::ofstream leading_out(leading_csv);
  if (!coeffs_out || !leading_out) throw Error("io", "cannot open coefficient outputs");
  coeffs_out << "n,phi0,k,lambda_k,a_k,b_k,f_k,da_k,df_k,fit_residual\n";
  leading_out << "n,phi0,case,order,coefficient\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int n : config.orders) {
    const double phi0 = resolve_reference(engine, config, n);
    const SeriesCoefficients series = series_coefficients(engine, phi0, max_order, grid);
    coeffs_out << n << ',' << fmt17(phi0) << ",0,nan,nan," << fmt17(series.b_k(0))
               << ",nan,nan,nan," << fmt17(series.fit_residual) << '\n';
    for (int k = 1; k <= max_order; ++k) {
      coeffs_out << n << ',' << fmt17(phi0) << ',' << k << ',' << fmt17(series.lambda_k(k - 1))
                 << ',' << fmt17(series.a_k(k - 1)) << ',' << fmt17(series.b_k(k)) << ','
                 << fmt17(series.f_k(k - 1)) << ',' << fmt17(series.da_k(k - 1)) << ','
                 << fmt17(series.df_k(k - 1)) << ',' << fmt17(series.fit_residual) << '\n';
    }
    const double phi_probe = 0.5 * (config.phi_grid.min + config.phi_grid.max);
    for (bool mitigated : {false, true}) {
      if (mitigated && n == 1) continue;
      const LeadingOrder lead = bias_leading_order(series, mitigated, phi_probe, n);
      leading_out << n << ',' << fmt17(phi0) << ',' << (mitigated ? "mitigated" : "error") << ','
                  << lead.order << ','
                  << (lead.coefficient_known ? fmt17(lead.coefficient) : fmt17(nan)) << '\n';
    }
  }
  return RunArtifacts{{coeffs_csv.string(), leading_csv.string()}};
}

}  // namespace vpem
