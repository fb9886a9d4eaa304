#pragma once

#include "fdb/dgp.hpp"
#include "fdb/rng.hpp"
#include "fdb/spectral.hpp"
#include "fdb/stats.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fdb {

struct CvReport
{
  std::vector<double> bandwidths;
  std::vector<double> scores; // +inf where the leave-one-out estimate vanishes
  double selected = 0.0;
  std::size_t selected_index = 0;
};

/// `count` log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Leave-one-out cross-validation of the kernel-smoothed estimate:
/// CV(h) = mean_j { log f_{-j}(lambda_j) + I_n(lambda_j) / f_{-j}(lambda_j) }
/// over j = 1..floor(n/2), where f_{-j} drops +-j. Ties go to the smaller h.
/// Throws std::domain_error when no bandwidth gives a finite score.
CvReport cv_bandwidth(const SeriesSample& x, std::span<const double> bandwidths);

struct ARFit
{
  std::size_t order = 0;
  std::vector<double> coefficients; // a_1..a_p
  std::vector<double> residuals;    // centered, t = p+1..n
  double sigma2 = 0.0;              // residual variance
  double eta = 0.0;                 // residual kurtosis ratio
  std::vector<double> aic;          // n log sigma_p^2 + 2p, p = 0..p_max

  /// sigma2 / (2 pi) |1 - sum_j a_j exp(-i lambda j)|^{-2}
  double spectral_density(double lambda) const;
  SpectralEstimate as_estimate() const;
};

/// Levinson-Durbin solution of the Yule-Walker equations for orders
/// 0..max_order. Returns the coefficient vector per order; innovation
/// variances go to `errors`. Throws std::domain_error if the system is
/// singular.
std::vector<std::vector<double>> levinson_durbin(std::span<const double> gamma,
                                                 std::size_t max_order,
                                                 std::vector<double>& errors);

std::size_t default_max_ar_order(std::size_t n);

/// Yule-Walker AR fit with the order chosen by AIC over 0..max_order
/// (default floor(10 log10 n)).
ARFit fit_ar(const SeriesSample& x, std::optional<std::size_t> max_order = {});

/// Simulate n values from the fitted AR model driven by i.i.d. draws from
/// its centered residuals, started from zeros with `burn_in` discarded.
SeriesSample simulate_ar_sieve(const ARFit& fit, std::size_t n, Engine& rng, std::size_t burn_in = 200);

/// Off-diagonal (|j1| != |j2|) part of the subsample double sum: the
/// estimate of tau_2 at one block length for a given spectral estimate.
double tau2_subsample(const SeriesSample& x,
                      const SpectralEstimate& fhat,
                      const PhiFunction& phi,
                      std::size_t block_length);

struct BlockSelectionReport
{
  std::vector<std::size_t> blocks;
  std::vector<double> mse;       // V_L(b)
  std::vector<double> mean_tau2; // average tau^_{2,AR}(b) over replicates
  std::size_t selected = 0;      // b*
  double target = 0.0;           // tau^_{2,AR}
  std::size_t replicates = 0;    // L
  ARFit fit;
};

/// floor(n^{1/3}) .. floor(3 n^{1/3}) in steps of 2, restricted to [2, n/2].
std::vector<std::size_t> default_block_grid(std::size_t n);

/// AR-sieve selection of the block length minimizing
/// V_L(b) = L^{-1} sum_l (tau^{(l)}_{2,AR}(b) - tau^_{2,AR})^2.
BlockSelectionReport select_block_length(const SeriesSample& x,
                                         const PhiFunction& phi,
                                         std::span<const std::size_t> blocks,
                                         std::size_t replicates,
                                         std::uint64_t seed,
                                         std::optional<std::size_t> max_order = {});

} // namespace fdb
