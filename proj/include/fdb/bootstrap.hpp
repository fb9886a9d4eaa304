#pragma once

#include "fdb/spectral.hpp"
#include "fdb/stats.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdb {

enum class MpbScheme
{
  exponential, // U*_j ~ Exp(1)
  empirical,   // U*_j uniform on the rescaled residuals U^_j
};

std::string to_string(MpbScheme s);

struct BootstrapOptions
{
  std::size_t block_length = 0;
  std::size_t replicates = 1000;
  MpbScheme mpb_scheme = MpbScheme::exponential;
  std::uint64_t seed = 0;

  /// Requires 2 <= b <= n and replicates >= 2.
  void validate(std::size_t n) const;
};

/// Rate guidance for the block length: b^3/n and ln(N)/b should be small.
struct BlockDiagnostics
{
  std::size_t blocks;     // k = floor(n/b)
  std::size_t subsamples; // N = n - b + 1
  double b_cubed_over_n;
  double log_count_over_b;
};

BlockDiagnostics block_diagnostics(std::size_t n, std::size_t b);

enum class DrawKind
{
  mpb_mean,     // V*_n
  cbp_mean,     // L*_n
  cbp_ratio,    // L*_{n,R}
  mpb_weighted, // V*_{1,n}
  cbp_weighted, // V*_{2,n}
  combined_weighted, // V*_{3,n}
  mpb_ratio,    // V*_{n,R}
  hybrid_mean,  // V~*_n
  hybrid_ratio, // V~*_{n,R}
};

std::string to_string(DrawKind k);

struct DrawSet
{
  DrawKind kind;
  std::vector<double> draws;
  double center = 0.0; // bootstrap analogue of the estimand
  BootstrapOptions options;

  double mean() const;
  /// Sample variance with divisor M - 1.
  double variance() const;
};

enum class VarianceMethod
{
  closed_form,
  monte_carlo,
};

struct VarianceReport
{
  double var_star = 0.0;   // the bootstrap variance of the reported draws
  double first = 0.0;      // tau1^2 (mean) or sigma^2_{1,R} (ratio)
  double correction = 0.0; // c_n or c_{n,R}
  double total = 0.0;      // tau^2 (mean) or sigma^2_R (ratio), floored at 0
  double double_sum = 0.0; // the s~^2 double sum over G(b) x G(b)
  double combined = 0.0;   // Var*(L* + V*) or Var*(V*_{3,n}) before subtracting c
  VarianceMethod method = VarianceMethod::closed_form;
};

struct HybridResult
{
  DrawSet draws;
  VarianceReport report;
  double rescale = 1.0; // tau~ / tau~_1 (or sigma~_R / sigma~_{1,R})
};

struct ConfidenceInterval
{
  double lower;
  double upper;
  double level; // 1 - 2 alpha
  double point;
  double studentizer; // s~_n or s~_{n,R}
  double t_lower;     // t*_alpha
  double t_upper;     // t*_{1-alpha}
};

/// (4 pi^2 / b) N^{-1} sum_t ( sum_j a_j f_j (U_{t,j} - 1) )^2: the full
/// double sum over G(b) x G(b) of a a f f Cov*(U, U).
double subsample_double_sum(const ResidualMatrix& residuals,
                            const FourierGrid& grid,
                            std::span<const double> weights,
                            std::span<const double> fhat);

/// The |j1| = |j2| part of subsample_double_sum:
/// (4 pi^2 / b) sum_j a_j (a_j + a_{-j}) f_j^2 (N^{-1} sum_t U_{t,j}^2 - 1).
double subsample_diagonal_sum(const ResidualMatrix& residuals,
                              const FourierGrid& grid,
                              std::span<const double> weights,
                              std::span<const double> fhat);

/// Precomputed state for the multiplicative (MPB), convolved subsample (CBP)
/// and hybrid (HPB) periodogram bootstraps of one series, one spectral
/// estimate, one phi and one block length.
///
/// Streams: replicate m of the MPB uses make_stream(seed, mpb, m) and of the
/// CBP make_stream(seed, cbp, m). The hybrid reuses both, so its V* and L*
/// draws coincide with mpb_draws and cbp_draws for the same seed and are
/// independent of each other.
class FrequencyBootstrap
{
public:
  FrequencyBootstrap(const SeriesSample& x,
                     const SpectralEstimate& fhat,
                     PhiFunction phi,
                     BootstrapOptions options);

  std::size_t length() const noexcept { return n_; }
  std::size_t block_length() const noexcept { return b_; }
  std::size_t blocks() const noexcept { return k_; }
  std::size_t subsamples() const noexcept { return count_; }
  const BootstrapOptions& options() const noexcept { return options_; }
  const PhiFunction& phi() const noexcept { return phi_; }
  BlockDiagnostics diagnostics() const { return block_diagnostics(n_, b_); }

  const Periodogram& periodogram() const noexcept { return pg_; }
  const SubsamplePeriodogramMatrix& subsamples_matrix() const noexcept { return sub_; }
  const ResidualMatrix& residuals() const noexcept { return resid_; }
  const ResidualMatrix& mpb_residuals() const noexcept { return mpb_resid_; }
  std::span<const double> fhat_full() const noexcept { return f_n_; }
  std::span<const double> fhat_block() const noexcept { return f_b_; }
  const RatioWeights& weights_full() const noexcept { return w_hat_; }
  const RatioWeights& weights_block() const noexcept { return w_tilde_; }

  /// M_G(phi, I_n) or R_G(phi, I_n).
  double point_estimate(StatisticKind kind) const;

  /// V*_n (mean) or V*_{n,R} (ratio).
  DrawSet mpb_draws(StatisticKind kind, std::optional<std::uint64_t> seed = {}) const;
  /// L*_n (mean) or L*_{n,R} (ratio).
  DrawSet cbp_draws(StatisticKind kind, std::optional<std::uint64_t> seed = {}) const;
  /// Monte-Carlo hybrid: V~*_n or V~*_{n,R}. Throws std::domain_error when
  /// the MPB part has zero variance.
  HybridResult hybrid_draws(StatisticKind kind, std::optional<std::uint64_t> seed = {}) const;
  /// Hybrid rescaling of existing MPB and CBP mean draws (paired by index).
  HybridResult hybrid_from_draws(const DrawSet& mpb, const DrawSet& cbp) const;

  /// Exact Var*(L*_n), or the linearized s~^2_{n,R} for ratios.
  VarianceReport cbp_variance_closed_form(StatisticKind kind) const;
  /// c_n (mean, weights phi) or c_{n,R} (ratio, weights w~).
  double cn_correction(StatisticKind kind) const;
  /// Hybrid variance pieces from closed forms instead of Monte Carlo;
  /// var_star holds tau^2 (mean) or sigma^2_R (ratio).
  VarianceReport hybrid_variance_closed_form(StatisticKind kind) const;

  /// Studentized CBP interval of level 1 - 2 alpha for M(phi, f) or R(phi, f).
  ConfidenceInterval confidence_interval(StatisticKind kind,
                                         double alpha,
                                         std::optional<std::uint64_t> seed = {}) const;

private:
  struct MpbReplicate
  {
    double mean;    // V*_n
    double weighted; // V*_{1,n}
    double denom;   // D*_n
  };
  struct CbpReplicate
  {
    double mean;     // L*_n
    double ratio;    // L*_{n,R}
    double weighted; // V*_{2,n}
  };

  MpbReplicate mpb_replicate(std::uint64_t seed, std::size_t m, std::vector<double>& buf) const;
  CbpReplicate cbp_replicate(std::uint64_t seed, std::size_t m) const;
  double mpb_innovation_variance() const;
  double variance_scale() const; // n / (b k)

  std::size_t n_;
  std::size_t b_;
  std::size_t k_;
  std::size_t count_;
  BootstrapOptions options_;
  PhiFunction phi_;
  FourierGrid grid_n_;
  FourierGrid grid_b_;
  Periodogram pg_;
  SubsamplePeriodogramMatrix sub_;
  ResidualMatrix resid_;
  ResidualMatrix mpb_resid_;
  std::vector<double> f_n_;
  std::vector<double> f_b_;
  std::vector<double> phi_n_;
  std::vector<double> phi_b_;
  RatioWeights w_hat_;
  RatioWeights w_tilde_;
  std::vector<double> w_hat_block_; // w^ evaluated at lambda_{j,b}

  // MPB: per positive index j, coefficients of (U*_j - 1) or U*_j
  std::vector<double> mpb_mean_coef_;
  std::vector<double> mpb_weighted_coef_;
  std::vector<double> mpb_mass_coef_;
  // CBP: per subsample row t
  std::vector<double> row_mean_;     // sum_j phi f (U - 1)
  std::vector<double> row_phi_mass_; // sum_j phi f U
  std::vector<double> row_mass_;     // sum_j f U
  std::vector<double> row_weighted_; // sum_j w~ f U
};

} // namespace fdb
