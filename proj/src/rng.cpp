#include "vpem/rng.hpp"

#include "vpem/errors.hpp"

namespace vpem::rng {

double sample_outcome_mean(double expectation, long long n_shots, std::mt19937_64& gen) {
  if (n_shots < 1) throw ConfigError("sample_outcome_mean: n_shots must be >= 1");
  double p = 0.5 * (1.0 + expectation);
  if (p < -1e-12 || p > 1.0 + 1e-12)
    throw NumericalError("sample_outcome_mean: outcome probability outside [0,1]");
  p = std::min(1.0, std::max(0.0, p));
  std::binomial_distribution<long long> dist(n_shots, p);
  const long long k = dist(gen);
  return static_cast<double>(2 * k - n_shots) / static_cast<double>(n_shots);
}

}  // namespace vpem::rng
