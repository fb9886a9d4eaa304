#pragma once

#include "fdb/spectral.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdb {

/// Weight function phi on [-pi, pi] defining a spectral mean.
class PhiFunction
{
public:
  enum class Kind
  {
    cos_lag,      // cos(h lambda)
    indicator,    // 1_{(0, x]}(lambda)
    constant_one, // 1
    tabulated,    // values on the positions of one Fourier grid
  };

  static PhiFunction cos_lag(unsigned lag);
  static PhiFunction indicator(double upper);
  static PhiFunction constant_one();
  static PhiFunction tabulated(const FourierGrid& grid, std::vector<double> values);
  /// "cos:h", "indicator:x" or "one".
  static PhiFunction parse(const std::string& text);

  /// c * phi; scale 0 gives the zero function.
  PhiFunction scaled(double c) const;

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  double scale() const noexcept { return scale_; }
  bool is_even() const noexcept { return kind_ != Kind::indicator && kind_ != Kind::tabulated; }
  std::string describe() const;

  /// Tabulated functions are defined only at their grid frequencies and
  /// throw std::domain_error elsewhere.
  double operator()(double lambda) const;
  std::vector<double> on_grid(const FourierGrid& grid) const;

  /// Discontinuities inside (-pi, pi), used to split quadrature.
  std::vector<double> breakpoints() const;

private:
  PhiFunction(Kind kind, double param);

  Kind kind_;
  double param_;
  double scale_ = 1.0;
  std::optional<FourierGrid> table_grid_;
  std::vector<double> table_;
};

enum class StatisticKind
{
  mean,
  ratio,
};

std::string to_string(StatisticKind k);
StatisticKind parse_statistic_kind(const std::string& s);

struct SpectralMeanResult
{
  double value;
  StatisticKind kind;
  std::size_t order;
};

/// (2 pi / m) sum_{j in G(m)} phi(lambda_{j,m}) p_j
SpectralMeanResult spectral_mean(const PhiFunction& phi,
                                 const FourierGrid& grid,
                                 std::span<const double> values);
SpectralMeanResult spectral_mean(const PhiFunction& phi, const Periodogram& pg);

/// sum phi p / sum p; throws std::domain_error when sum p <= 0.
SpectralMeanResult ratio_statistic(const PhiFunction& phi,
                                   const FourierGrid& grid,
                                   std::span<const double> values);
SpectralMeanResult ratio_statistic(const PhiFunction& phi, const Periodogram& pg);

/// Integral forms M(phi, I_n) = int phi I_n and R(phi, I_n), computed
/// exactly from the time-domain autocovariances; for phi = cos(h .) these
/// are gamma^(h) and rho^(h). Tabulated phi is rejected.
double integrated_spectral_mean(const PhiFunction& phi, const SeriesSample& x);
double integrated_ratio_statistic(const PhiFunction& phi, const SeriesSample& x);

/// w(lambda) = phi(lambda) * mass - phi_mass, where mass and phi_mass are the
/// Riemann sums of f and phi*f on G(m). The tabulated values satisfy
/// (2 pi / m) sum w f = 0.
struct RatioWeights
{
  PhiFunction phi;
  FourierGrid grid;
  double mass;
  double phi_mass;
  std::vector<double> values; // on grid positions

  double operator()(double lambda) const { return phi(lambda) * mass - phi_mass; }
};

RatioWeights ratio_weights(const PhiFunction& phi,
                           const FourierGrid& grid,
                           std::span<const double> fhat_on_grid);
RatioWeights ratio_weights(const PhiFunction& phi,
                           const SpectralEstimate& fhat,
                           std::size_t order);

/// Composite Simpson rule on [a, b] with an even number of intervals.
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t intervals);

/// Integral over [-pi, pi], split at phi's breakpoints, Simpson on each
/// piece with `intervals` subintervals.
double integrate_over_circle(const std::function<double(double)>& f,
                             const PhiFunction& phi,
                             std::size_t intervals = 4096);

/// Linear process X_t = sum_j a_j e_{t-j} with Var e = sigma2 and
/// E e^4 / sigma^4 = eta.
struct LinearModelOracle
{
  std::vector<double> ma; // a_0, a_1, ...
  double sigma2 = 1.0;
  double eta = 3.0;

  double spectral_density(double lambda) const;
  double autocovariance(std::size_t lag) const;
};

struct AsymptoticVariance
{
  double tau1_sq;
  double tau2;
  double tau_sq;
  double tau1_ratio_sq;
  double tau2_ratio; // zero for linear processes
  double tau_ratio_sq;
};

/// Closed-form limits of the spectral-mean and ratio statistics for a linear
/// process; throws std::invalid_argument when eta < 1.
AsymptoticVariance linear_asymptotic_variance(const LinearModelOracle& oracle,
                                              const PhiFunction& phi);

} // namespace fdb
