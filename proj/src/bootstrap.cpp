#include "fdb/bootstrap.hpp"

#include "fdb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace fdb {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double four_pi_sq = two_pi * two_pi;

double sample_variance(std::span<const double> v)
{
  if (v.size() < 2)
    return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v)
    s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

std::size_t checked_blocks(std::size_t n, const BootstrapOptions& options)
{
  options.validate(n);
  return n / options.block_length;
}

/// Order statistic ceil(q M) (1-based) of sorted values.
double order_statistic(std::span<const double> sorted, double q)
{
  const double pos = std::ceil(q * static_cast<double>(sorted.size()) - 1e-9);
  const auto idx = static_cast<std::size_t>(std::max(1.0, pos));
  return sorted[std::min(idx, sorted.size()) - 1];
}

} // namespace

std::string to_string(MpbScheme s)
{
  return s == MpbScheme::exponential ? "exponential" : "empirical";
}

std::string to_string(DrawKind k)
{
  switch (k) {
    case DrawKind::mpb_mean:
      return "V_n*";
    case DrawKind::cbp_mean:
      return "L_n*";
    case DrawKind::cbp_ratio:
      return "L_nR*";
    case DrawKind::mpb_weighted:
      return "V1*";
    case DrawKind::cbp_weighted:
      return "V2*";
    case DrawKind::combined_weighted:
      return "V3*";
    case DrawKind::mpb_ratio:
      return "V_nR*";
    case DrawKind::hybrid_mean:
      return "V~_n*";
    case DrawKind::hybrid_ratio:
      return "V~_nR*";
  }
  return "?";
}

void BootstrapOptions::validate(std::size_t n) const
{
  if (block_length < 2)
    throw std::invalid_argument("block length must be at least 2");
  if (block_length > n)
    throw std::invalid_argument("block length exceeds series length");
  if (replicates < 2)
    throw std::invalid_argument("need at least two bootstrap replicates");
}

BlockDiagnostics block_diagnostics(std::size_t n, std::size_t b)
{
  const std::size_t count = n - b + 1;
  const double bd = static_cast<double>(b);
  return BlockDiagnostics{ n / b, count, bd * bd * bd / static_cast<double>(n),
                           std::log(static_cast<double>(count)) / bd };
}

double DrawSet::mean() const
{
  if (draws.empty())
    return 0.0;
  return std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
}

double DrawSet::variance() const
{
  return sample_variance(draws);
}

double subsample_double_sum(const ResidualMatrix& residuals,
                            const FourierGrid& grid,
                            std::span<const double> weights,
                            std::span<const double> fhat)
{
  const std::size_t cols = residuals.cols;
  if (grid.size() != cols || weights.size() != cols || fhat.size() != cols)
    throw std::invalid_argument("subsample_double_sum: size mismatch");
  double acc = 0.0;
  for (std::size_t t = 0; t < residuals.rows; ++t) {
    const auto u = residuals.row(t);
    double s = 0.0;
    for (std::size_t p = 0; p < cols; ++p)
      s += weights[p] * fhat[p] * (u[p] - 1.0);
    acc += s * s;
  }
  return four_pi_sq / static_cast<double>(grid.order()) * acc / static_cast<double>(residuals.rows);
}

double subsample_diagonal_sum(const ResidualMatrix& residuals,
                              const FourierGrid& grid,
                              std::span<const double> weights,
                              std::span<const double> fhat)
{
  const std::size_t cols = residuals.cols;
  if (grid.size() != cols || weights.size() != cols || fhat.size() != cols)
    throw std::invalid_argument("subsample_diagonal_sum: size mismatch");
  std::vector<double> second(cols, 0.0);
  for (std::size_t t = 0; t < residuals.rows; ++t) {
    const auto u = residuals.row(t);
    for (std::size_t p = 0; p < cols; ++p)
      second[p] += u[p] * u[p];
  }
  double s = 0.0;
  for (std::size_t p = 0; p < cols; ++p) {
    const double excess = second[p] / static_cast<double>(residuals.rows) - 1.0;
    s += weights[p] * (weights[p] + weights[grid.mirror(p)]) * fhat[p] * fhat[p] * excess;
  }
  return four_pi_sq / static_cast<double>(grid.order()) * s;
}

// ---------------------------------------------------------------- FrequencyBootstrap

FrequencyBootstrap::FrequencyBootstrap(const SeriesSample& x,
                                       const SpectralEstimate& fhat,
                                       PhiFunction phi,
                                       BootstrapOptions options)
  : n_(x.size())
  , b_(options.block_length)
  , k_(checked_blocks(x.size(), options))
  , count_(n_ - b_ + 1)
  , options_(options)
  , phi_(std::move(phi))
  , grid_n_(n_)
  , grid_b_(b_)
  , pg_(fdb::periodogram(x, grid_n_))
  , sub_(subsample_periodograms(x, b_))
  , resid_(subsample_residuals(sub_))
  , mpb_resid_{ ResidualScheme::mpb_empirical, 0, 0, {} }
  , f_n_(fhat.floored(grid_n_))
  , f_b_(fhat.floored(grid_b_))
  , phi_n_(phi_.on_grid(grid_n_))
  , phi_b_(phi_.on_grid(grid_b_))
  , w_hat_(ratio_weights(phi_, grid_n_, f_n_))
  , w_tilde_(ratio_weights(phi_, grid_b_, f_b_))
{
  if (options_.mpb_scheme == MpbScheme::empirical)
    mpb_resid_ = fdb::mpb_residuals(pg_, fhat);

  w_hat_block_.resize(grid_b_.size());
  for (std::size_t p = 0; p < grid_b_.size(); ++p)
    w_hat_block_[p] = w_hat_(grid_b_.frequency(p));

  const std::size_t h = grid_n_.half();
  const double root_n = std::sqrt(static_cast<double>(n_));
  const double step_n = two_pi / static_cast<double>(n_);
  mpb_mean_coef_.resize(h);
  mpb_weighted_coef_.resize(h);
  mpb_mass_coef_.resize(h);
  for (std::size_t j = 1; j <= h; ++j) {
    const std::size_t plus = grid_n_.positive_position(j);
    const std::size_t minus = grid_n_.mirror(plus);
    const double f = f_n_[plus];
    mpb_mean_coef_[j - 1] = two_pi / root_n * (phi_n_[plus] + phi_n_[minus]) * f;
    mpb_weighted_coef_[j - 1] = two_pi / root_n * (w_hat_.values[plus] + w_hat_.values[minus]) * f;
    mpb_mass_coef_[j - 1] = step_n * 2.0 * f * w_hat_.mass;
  }

  const std::size_t cols = grid_b_.size();
  row_mean_.resize(count_);
  row_phi_mass_.resize(count_);
  row_mass_.resize(count_);
  row_weighted_.resize(count_);
  for (std::size_t t = 0; t < count_; ++t) {
    const auto u = resid_.row(t);
    double mean = 0.0, phi_mass = 0.0, mass = 0.0, weighted = 0.0;
    for (std::size_t p = 0; p < cols; ++p) {
      const double fu = f_b_[p] * u[p];
      mean += phi_b_[p] * f_b_[p] * (u[p] - 1.0);
      phi_mass += phi_b_[p] * fu;
      mass += fu;
      weighted += w_tilde_.values[p] * f_b_[p] * (u[p] - 1.0);
    }
    row_mean_[t] = mean;
    row_phi_mass_[t] = phi_mass;
    row_mass_[t] = mass;
    row_weighted_[t] = weighted;
  }
}

double FrequencyBootstrap::point_estimate(StatisticKind kind) const
{
  return kind == StatisticKind::mean ? spectral_mean(phi_, pg_).value
                                     : ratio_statistic(phi_, pg_).value;
}

double FrequencyBootstrap::variance_scale() const
{
  return static_cast<double>(n_) / (static_cast<double>(b_) * static_cast<double>(k_));
}

double FrequencyBootstrap::mpb_innovation_variance() const
{
  if (options_.mpb_scheme == MpbScheme::exponential)
    return 1.0;
  double s = 0.0;
  for (double u : mpb_resid_.values)
    s += u * u;
  return s / static_cast<double>(mpb_resid_.values.size()) - 1.0;
}

FrequencyBootstrap::MpbReplicate FrequencyBootstrap::mpb_replicate(std::uint64_t seed,
                                                                   std::size_t m,
                                                                   std::vector<double>& u) const
{
  Engine rng = make_stream(seed, stream_tag::mpb, m);
  const std::size_t h = mpb_mean_coef_.size();
  u.resize(h);
  if (options_.mpb_scheme == MpbScheme::exponential) {
    std::exponential_distribution<double> expo(1.0);
    for (auto& v : u)
      v = expo(rng);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, mpb_resid_.values.size() - 1);
    for (auto& v : u)
      v = mpb_resid_.values[pick(rng)];
  }
  MpbReplicate r{ 0.0, 0.0, 0.0 };
  for (std::size_t j = 0; j < h; ++j) {
    const double centered = u[j] - 1.0;
    r.mean += mpb_mean_coef_[j] * centered;
    r.weighted += mpb_weighted_coef_[j] * centered;
    r.denom += mpb_mass_coef_[j] * u[j];
  }
  return r;
}

FrequencyBootstrap::CbpReplicate FrequencyBootstrap::cbp_replicate(std::uint64_t seed,
                                                                   std::size_t m) const
{
  Engine rng = make_stream(seed, stream_tag::cbp, m);
  std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
  double mean = 0.0, phi_mass = 0.0, mass = 0.0, weighted = 0.0;
  for (std::size_t l = 0; l < k_; ++l) {
    const std::size_t t = pick(rng);
    mean += row_mean_[t];
    phi_mass += row_phi_mass_[t];
    mass += row_mass_[t];
    weighted += row_weighted_[t];
  }
  const double root_n = std::sqrt(static_cast<double>(n_));
  const double scale = root_n * two_pi / static_cast<double>(b_) / static_cast<double>(k_);
  return CbpReplicate{ scale * mean, root_n * (phi_mass / mass - w_tilde_.phi_mass / w_tilde_.mass),
                       scale * weighted };
}

DrawSet FrequencyBootstrap::mpb_draws(StatisticKind kind, std::optional<std::uint64_t> seed) const
{
  const std::uint64_t s = seed.value_or(options_.seed);
  const std::size_t M = options_.replicates;
  DrawSet out{ kind == StatisticKind::mean ? DrawKind::mpb_mean : DrawKind::mpb_ratio,
               std::vector<double>(M), 0.0, options_ };
  out.options.seed = s;
  out.center = kind == StatisticKind::mean ? w_hat_.phi_mass : w_hat_.phi_mass / w_hat_.mass;
  const auto count = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(static)
    for (std::ptrdiff_t m = 0; m < count; ++m) {
      const auto r = mpb_replicate(s, static_cast<std::size_t>(m), buf);
      out.draws[static_cast<std::size_t>(m)] =
        kind == StatisticKind::mean ? r.mean : r.weighted / r.denom;
    }
  }
  return out;
}

DrawSet FrequencyBootstrap::cbp_draws(StatisticKind kind, std::optional<std::uint64_t> seed) const
{
  const std::uint64_t s = seed.value_or(options_.seed);
  const std::size_t M = options_.replicates;
  DrawSet out{ kind == StatisticKind::mean ? DrawKind::cbp_mean : DrawKind::cbp_ratio,
               std::vector<double>(M), 0.0, options_ };
  out.options.seed = s;
  out.center = kind == StatisticKind::mean ? w_tilde_.phi_mass : w_tilde_.phi_mass / w_tilde_.mass;
  const auto count = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < count; ++m) {
    const auto r = cbp_replicate(s, static_cast<std::size_t>(m));
    out.draws[static_cast<std::size_t>(m)] = kind == StatisticKind::mean ? r.mean : r.ratio;
  }
  return out;
}

HybridResult FrequencyBootstrap::hybrid_from_draws(const DrawSet& mpb, const DrawSet& cbp) const
{
  if (mpb.kind != DrawKind::mpb_mean || cbp.kind != DrawKind::cbp_mean)
    throw std::invalid_argument("hybrid_from_draws: expects V*_n and L*_n draws");
  if (mpb.draws.size() != cbp.draws.size() || mpb.draws.size() < 2)
    throw std::invalid_argument("hybrid_from_draws: draw counts differ");
  const double var_v = mpb.variance();
  if (!(var_v > 0.0))
    throw std::domain_error("hybrid bootstrap: Var*(V*_n) vanishes (degenerate phi)");
  std::vector<double> sum(mpb.draws.size());
  for (std::size_t i = 0; i < sum.size(); ++i)
    sum[i] = mpb.draws[i] + cbp.draws[i];
  const double combined = sample_variance(sum);
  const double cn = cn_correction(StatisticKind::mean);
  const double total = std::max(0.0, combined - cn);
  const double factor = std::sqrt(total / var_v);

  HybridResult res{ DrawSet{ DrawKind::hybrid_mean, mpb.draws, mpb.center, mpb.options }, {}, factor };
  for (auto& d : res.draws.draws)
    d *= factor;
  res.report = VarianceReport{ res.draws.variance(), var_v, cn, total, 0.0, combined,
                               VarianceMethod::monte_carlo };
  return res;
}

HybridResult FrequencyBootstrap::hybrid_draws(StatisticKind kind, std::optional<std::uint64_t> seed) const
{
  const std::uint64_t s = seed.value_or(options_.seed);
  if (kind == StatisticKind::mean)
    return hybrid_from_draws(mpb_draws(kind, s), cbp_draws(kind, s));

  const std::size_t M = options_.replicates;
  std::vector<double> v1(M), v3(M), vr(M);
  const auto count = static_cast<std::ptrdiff_t>(M);
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(static)
    for (std::ptrdiff_t m = 0; m < count; ++m) {
      const auto i = static_cast<std::size_t>(m);
      const auto a = mpb_replicate(s, i, buf);
      const auto c = cbp_replicate(s, i);
      v1[i] = a.weighted;
      v3[i] = a.weighted + c.weighted;
      vr[i] = a.weighted / a.denom;
    }
  }
  const double var1 = sample_variance(v1);
  if (!(var1 > 0.0))
    throw std::domain_error("hybrid bootstrap: Var*(V*_{1,n}) vanishes (degenerate phi)");
  const double combined = sample_variance(v3);
  const double cn = cn_correction(StatisticKind::ratio);
  const double total = std::max(0.0, combined - cn);
  const double factor = std::sqrt(total / var1);

  BootstrapOptions opts = options_;
  opts.seed = s;
  HybridResult res{ DrawSet{ DrawKind::hybrid_ratio, std::move(vr), w_hat_.phi_mass / w_hat_.mass, opts },
                    {}, factor };
  for (auto& d : res.draws.draws)
    d *= factor;
  res.report = VarianceReport{ res.draws.variance(), var1, cn, total, 0.0, combined,
                               VarianceMethod::monte_carlo };
  return res;
}

VarianceReport FrequencyBootstrap::cbp_variance_closed_form(StatisticKind kind) const
{
  VarianceReport r;
  r.method = VarianceMethod::closed_form;
  if (kind == StatisticKind::mean) {
    r.double_sum = subsample_double_sum(resid_, grid_b_, phi_b_, f_b_);
    r.correction = cn_correction(kind);
    r.var_star = variance_scale() * r.double_sum;
  } else {
    const double db = w_tilde_.mass;
    const double db4 = db * db * db * db;
    r.double_sum = subsample_double_sum(resid_, grid_b_, w_hat_block_, f_b_) / db4;
    r.correction = cn_correction(kind);
    r.var_star = variance_scale() * r.double_sum;
  }
  return r;
}

double FrequencyBootstrap::cn_correction(StatisticKind kind) const
{
  return kind == StatisticKind::mean
           ? subsample_diagonal_sum(resid_, grid_b_, phi_b_, f_b_)
           : subsample_diagonal_sum(resid_, grid_b_, w_tilde_.values, f_b_);
}

VarianceReport FrequencyBootstrap::hybrid_variance_closed_form(StatisticKind kind) const
{
  const auto& coef = kind == StatisticKind::mean ? mpb_mean_coef_ : mpb_weighted_coef_;
  const double vu = mpb_innovation_variance();
  double first = 0.0;
  for (double c : coef)
    first += c * c * vu;
  const auto& weights = kind == StatisticKind::mean ? phi_b_ : w_tilde_.values;
  const double second = variance_scale() * subsample_double_sum(resid_, grid_b_, weights, f_b_);
  const double cn = cn_correction(kind);
  VarianceReport r;
  r.method = VarianceMethod::closed_form;
  r.first = first;
  r.combined = first + second;
  r.correction = cn;
  r.total = std::max(0.0, first + second - cn);
  r.var_star = r.total;
  return r;
}

ConfidenceInterval FrequencyBootstrap::confidence_interval(StatisticKind kind,
                                                           double alpha,
                                                           std::optional<std::uint64_t> seed) const
{
  if (!(alpha > 0.0 && alpha <= 0.5))
    throw std::invalid_argument("confidence_interval: alpha must lie in (0, 1/2]");
  if (alpha * static_cast<double>(options_.replicates) < 1.0)
    throw std::invalid_argument("confidence_interval: too few replicates for alpha");
  const double sd = std::sqrt(cbp_variance_closed_form(kind).var_star);
  if (!(sd > 0.0))
    throw std::domain_error("confidence_interval: studentizer vanishes");
  auto draws = cbp_draws(kind, seed).draws;
  for (auto& d : draws)
    d /= sd;
  std::sort(draws.begin(), draws.end());
  const double t_lo = order_statistic(draws, alpha);
  const double t_hi = order_statistic(draws, 1.0 - alpha);
  const double point = point_estimate(kind);
  const double root_n = std::sqrt(static_cast<double>(n_));
  return ConfidenceInterval{ point - t_hi * sd / root_n, point - t_lo * sd / root_n,
                             1.0 - 2.0 * alpha, point, sd, t_lo, t_hi };
}

} // namespace fdb
