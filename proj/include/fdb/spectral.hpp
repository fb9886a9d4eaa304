#pragma once

#include "fdb/dgp.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fdb {

/// The index set {j : 1 <= |j| <= floor(m/2)} with frequencies 2*pi*j/m.
///
/// Positions run over j = -floor(m/2), ..., -1, 1, ..., floor(m/2), so the
/// partner of position p (index -j) sits at mirror(p). For even m both
/// j = m/2 and j = -m/2 are present; they share the frequency pi up to sign.
class FourierGrid
{
public:
  explicit FourierGrid(std::size_t order);

  std::size_t order() const noexcept { return order_; }
  std::size_t half() const noexcept { return order_ / 2; }
  std::size_t size() const noexcept { return 2 * half(); }

  int index(std::size_t pos) const noexcept;
  std::size_t position(int j) const;
  std::size_t mirror(std::size_t pos) const noexcept { return size() - 1 - pos; }
  /// Position of index +j for j = 1..half().
  std::size_t positive_position(std::size_t j) const noexcept { return half() - 1 + j; }
  double frequency(std::size_t pos) const noexcept;

  std::vector<int> indices() const;
  std::vector<double> frequencies() const;

private:
  std::size_t order_;
};

struct Periodogram
{
  FourierGrid grid;
  std::vector<double> values; // one per grid position
};

/// Subsample periodograms I_{t,b}(lambda_{j,b}) for t = 1..N (row-major) and
/// their column means, the averaged-subsample estimate on G(b).
class SubsamplePeriodogramMatrix
{
public:
  SubsamplePeriodogramMatrix(std::size_t block_length,
                             std::size_t count,
                             std::vector<double> values);

  std::size_t block_length() const noexcept { return grid_.order(); }
  std::size_t count() const noexcept { return count_; }
  const FourierGrid& grid() const noexcept { return grid_; }
  std::span<const double> row(std::size_t t) const;
  double at(std::size_t t, std::size_t pos) const { return values_[t * grid_.size() + pos]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> f_tilde() const noexcept { return f_tilde_; }

private:
  FourierGrid grid_;
  std::size_t count_;
  std::vector<double> values_;
  std::vector<double> f_tilde_;
};

enum class EstimatorMethod
{
  averaged_subsample,
  parzen_lag_window,
  kernel_smoothed,
  external,
};

std::string to_string(EstimatorMethod m);

/// A spectral density estimate evaluable at any frequency. Evaluation uses
/// |lambda|, so every estimate is exactly even.
class SpectralEstimate
{
public:
  using Evaluator = std::function<double(double)>;

  SpectralEstimate(EstimatorMethod method, double tuning, Evaluator eval);

  EstimatorMethod method() const noexcept { return method_; }
  double tuning() const noexcept { return tuning_; }

  double operator()(double lambda) const;
  std::vector<double> evaluate(const FourierGrid& grid) const;
  /// evaluate() followed by the positivity floor.
  std::vector<double> floored(const FourierGrid& grid) const;

private:
  EstimatorMethod method_;
  double tuning_;
  Evaluator eval_;
};

/// Relative floor applied before any division by a spectral estimate.
inline constexpr double positivity_floor_ratio = 1e-10;

/// Raise values below positivity_floor_ratio * max to that floor. Throws
/// std::domain_error if the maximum is not positive.
void apply_positivity_floor(std::span<double> values);

FourierGrid fourier_grid(std::size_t m);

/// I(lambda) = |sum_t x_t exp(-i lambda t)|^2 / (2 pi n) on the grid of
/// order n. Uses an FFT; values at j and -j are identical.
Periodogram periodogram(const SeriesSample& x, const FourierGrid& grid);
Periodogram periodogram(const SeriesSample& x);

/// Rows are periodograms of (x_t, ..., x_{t+b-1}) of the globally centered
/// series.
SubsamplePeriodogramMatrix subsample_periodograms(const SeriesSample& x,
                                                  std::size_t block_length);

/// gamma(h) = n^{-1} sum_t x_t x_{t+h} of the centered series, h = 0..max_lag.
std::vector<double> autocovariances(const SeriesSample& x, std::size_t max_lag);

double parzen_window(double u) noexcept;
double epanechnikov_kernel(double u) noexcept;

SpectralEstimate parzen_lag_window(const SeriesSample& x, std::size_t lag);

/// Kernel-smoothed periodogram with the Epanechnikov kernel, weights
/// normalized to one on G(n), circular distance across +-pi.
SpectralEstimate kernel_smoothed_estimate(const SeriesSample& x, double bandwidth);

/// The averaged-subsample (Bartlett-Welch) estimate as a function of lambda;
/// at lambda_{j,b} it reproduces the column means of subsample_periodograms.
SpectralEstimate averaged_subsample_estimate(const SeriesSample& x,
                                             std::size_t block_length);

SpectralEstimate external_estimate(SpectralEstimate::Evaluator eval, double tuning = 0.0);

/// Kernel weights K(d(lambda, lambda_s)/h) over grid positions, normalized
/// to sum one. `excluded` positions get weight zero. Returns false when all
/// weights vanish.
bool kernel_weights(const FourierGrid& grid,
                    double lambda,
                    double bandwidth,
                    std::span<double> weights,
                    std::span<const std::size_t> excluded = {});

enum class ResidualScheme
{
  mpb_empirical,
  subsample,
};

/// Frequency-domain residuals. For the subsample scheme rows are t = 1..N and
/// columns the positions of G(b); for the empirical MPB scheme there is one
/// row with columns j = 1..floor(n/2).
struct ResidualMatrix
{
  ResidualScheme scheme;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t t) const
  {
    return std::span<const double>(values).subspan(t * cols, cols);
  }
  double at(std::size_t t, std::size_t c) const { return values[t * cols + c]; }
};

/// U_{t,b} = I_{t,b} / f~_b (f~_b floored).
ResidualMatrix subsample_residuals(const SubsamplePeriodogramMatrix& sub);

/// U^_j = U~_j / mean(U~), U~_j = I_n(lambda_j) / f^(lambda_j), j=1..floor(n/2).
ResidualMatrix mpb_residuals(const Periodogram& pg, const SpectralEstimate& fhat);

} // namespace fdb
