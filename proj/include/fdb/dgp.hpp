#pragma once

#include "fdb/rng.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fdb {

enum class Innovation
{
  standard_normal,
  centered_exponential, // Exp(1) - 1
};

enum class ModelId
{
  I,   // MA(1), centered exponential innovations
  II,  // MA(1) driven by normalized ARCH(1)
  III, // MA(1) driven by the bilinear product e_t * e_{t-1}
  IV,  // nonlinear AR: X_t = phi sin(X_{t-1}) + e_t
};

struct ModelSpec
{
  ModelId model = ModelId::I;
  double theta = -0.7;
  double phi = -0.7;
  double a0 = 0.3;
  double a1 = 0.5;
  Innovation innovation = Innovation::centered_exponential;
  std::size_t burn_in = 500;

  /// Defaults for the four simulation models (Model I uses Exp(1)-1
  /// innovations, the others standard normal ones).
  static ModelSpec defaults(ModelId id);

  /// Throws std::invalid_argument on a0 <= 0, a1 outside [0,1) or
  /// burn_in < 100.
  void validate() const;
};

/// An observed or simulated real-valued series.
struct SeriesSample
{
  std::vector<double> values;
  bool centered = false;

  SeriesSample() = default;
  explicit SeriesSample(std::vector<double> v, bool is_centered = false);

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> view() const noexcept { return values; }
  double mean() const;

  /// Copy with the sample mean removed (no-op when already centered).
  SeriesSample centered_copy() const;
};

ModelId parse_model(const std::string& name);
std::string to_string(ModelId id);

std::vector<double> generate_innovations(Innovation kind,
                                         std::size_t count,
                                         Engine& rng);

/// Run the model recursion over a given innovation sequence, returning one
/// output per innovation. Values before the first innovation are zero.
std::vector<double> filter_innovations(const ModelSpec& spec,
                                       std::span<const double> innovations);

/// Simulate n observations after discarding spec.burn_in pre-samples.
SeriesSample simulate_model(const ModelSpec& spec, std::size_t n, Engine& rng);

} // namespace fdb
