#pragma once

#include <stdexcept>
#include <string>

namespace vpem {

/// Base for all library errors. `category()` is a stable machine-readable
/// tag used by the CLI to map failures onto exit codes.
class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

private:
  std::string category_;
};

/// Invalid or inconsistent user configuration (bad field values, bad CLI args).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// State or channel output lost more weight to the Fock cutoff than the
/// space's trace tolerance allows.
class TruncationError : public Error {
public:
  explicit TruncationError(const std::string& what) : Error("truncation", what) {}
};

/// A numerical consistency check failed (Hermiticity, PSD, imaginary residue,
/// quadrature non-convergence, vanishing denominators).
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};

/// Root/minimum search could not bracket or converge.
class SearchError : public Error {
public:
  explicit SearchError(const std::string& what) : Error("search", what) {}
};

/// The beam-splitter/phase conventions could not be reconciled with the
/// canonical sine response (indicates a convention bug, not a noise effect).
class ConventionError : public Error {
public:
  explicit ConventionError(const std::string& what) : Error("convention", what) {}
};

/// Shot-level emulation failed (zero denominator circuit outcome, degenerate
/// sensitivity).
class SamplingError : public Error {
public:
  explicit SamplingError(const std::string& what) : Error("sampling", what) {}
};

}  // namespace vpem
