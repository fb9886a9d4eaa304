#include "fdb/tuning.hpp"

#include "fdb/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fdb {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace

std::vector<double> log_spaced(double lo, double hi, std::size_t count)
{
  if (!(lo > 0.0 && hi >= lo) || count == 0)
    throw std::invalid_argument("log_spaced: need 0 < lo <= hi and count >= 1");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

CvReport cv_bandwidth(const SeriesSample& x, std::span<const double> bandwidths)
{
  if (bandwidths.empty())
    throw std::invalid_argument("cv_bandwidth: empty bandwidth grid");
  for (double h : bandwidths)
    if (!(h > 0.0 && h < std::numbers::pi))
      throw std::invalid_argument("cv_bandwidth: bandwidths must lie in (0, pi)");

  const Periodogram pg = periodogram(x);
  const FourierGrid& grid = pg.grid;
  const std::size_t half = grid.half();
  CvReport report;
  report.bandwidths.assign(bandwidths.begin(), bandwidths.end());
  report.scores.assign(bandwidths.size(), std::numeric_limits<double>::infinity());

  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < bandwidths.size(); ++i) {
    double score = 0.0;
    bool finite = true;
    for (std::size_t j = 1; j <= half && finite; ++j) {
      const std::size_t p = grid.positive_position(j);
      const std::size_t drop[2] = { p, grid.mirror(p) };
      if (!kernel_weights(grid, grid.frequency(p), bandwidths[i], w, drop)) {
        finite = false;
        break;
      }
      double f = 0.0;
      for (std::size_t s = 0; s < w.size(); ++s)
        f += w[s] * pg.values[s];
      const double term = std::log(f) + pg.values[p] / f;
      if (!std::isfinite(term))
        finite = false;
      score += term;
    }
    if (finite)
      report.scores[i] = score / static_cast<double>(half);
  }

  bool any = false;
  for (std::size_t i = 0; i < report.scores.size(); ++i) {
    if (!std::isfinite(report.scores[i]))
      continue;
    if (!any || report.scores[i] < report.scores[report.selected_index] ||
        (report.scores[i] == report.scores[report.selected_index] &&
         report.bandwidths[i] < report.bandwidths[report.selected_index])) {
      report.selected_index = i;
      any = true;
    }
  }
  if (!any)
    throw std::domain_error("cv_bandwidth: no bandwidth yields a finite criterion");
  report.selected = report.bandwidths[report.selected_index];
  return report;
}

// ---------------------------------------------------------------- AR fitting

std::vector<std::vector<double>> levinson_durbin(std::span<const double> gamma,
                                                 std::size_t max_order,
                                                 std::vector<double>& errors)
{
  if (gamma.size() < max_order + 1)
    throw std::invalid_argument("levinson_durbin: not enough autocovariances");
  if (!(gamma[0] > 0.0))
    throw std::domain_error("levinson_durbin: singular autocovariance system");
  std::vector<std::vector<double>> coef(max_order + 1);
  errors.assign(max_order + 1, 0.0);
  errors[0] = gamma[0];
  for (std::size_t p = 1; p <= max_order; ++p) {
    const auto& prev = coef[p - 1];
    double acc = gamma[p];
    for (std::size_t j = 1; j < p; ++j)
      acc -= prev[j - 1] * gamma[p - j];
    const double kappa = acc / errors[p - 1];
    auto& cur = coef[p];
    cur.resize(p);
    for (std::size_t j = 1; j < p; ++j)
      cur[j - 1] = prev[j - 1] - kappa * prev[p - j - 1];
    cur[p - 1] = kappa;
    errors[p] = errors[p - 1] * (1.0 - kappa * kappa);
    if (!(errors[p] > 0.0))
      throw std::domain_error("levinson_durbin: singular autocovariance system");
  }
  return coef;
}

std::size_t default_max_ar_order(std::size_t n)
{
  return static_cast<std::size_t>(std::floor(10.0 * std::log10(static_cast<double>(n))));
}

double ARFit::spectral_density(double lambda) const
{
  double re = 1.0;
  double im = 0.0;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    const double a = lambda * static_cast<double>(j + 1);
    re -= coefficients[j] * std::cos(a);
    im += coefficients[j] * std::sin(a);
  }
  return sigma2 / (two_pi * (re * re + im * im));
}

SpectralEstimate ARFit::as_estimate() const
{
  return external_estimate([fit = *this](double l) { return fit.spectral_density(l); },
                           static_cast<double>(order));
}

ARFit fit_ar(const SeriesSample& x, std::optional<std::size_t> max_order)
{
  const std::size_t n = x.size();
  const std::size_t pmax = max_order.value_or(std::min(default_max_ar_order(n), n / 2 - 1));
  if (2 * pmax >= n)
    throw std::invalid_argument("fit_ar: maximal order must be below n/2");
  const SeriesSample xc = x.centered_copy();
  const auto gamma = autocovariances(xc, pmax);
  std::vector<double> errors;
  const auto coef = levinson_durbin(gamma, pmax, errors);

  ARFit fit;
  fit.aic.resize(pmax + 1);
  const double nd = static_cast<double>(n);
  for (std::size_t p = 0; p <= pmax; ++p) {
    fit.aic[p] = nd * std::log(errors[p]) + 2.0 * static_cast<double>(p);
    if (fit.aic[p] < fit.aic[fit.order])
      fit.order = p;
  }
  fit.coefficients = coef[fit.order];

  const std::size_t p = fit.order;
  const auto& v = xc.values;
  std::vector<double> e(n - p);
  double mean = 0.0;
  for (std::size_t t = p; t < n; ++t) {
    double r = v[t];
    for (std::size_t j = 1; j <= p; ++j)
      r -= fit.coefficients[j - 1] * v[t - j];
    e[t - p] = r;
    mean += r;
  }
  mean /= static_cast<double>(e.size());
  double m2 = 0.0, m4 = 0.0;
  for (auto& r : e) {
    r -= mean;
    m2 += r * r;
    m4 += r * r * r * r;
  }
  m2 /= static_cast<double>(e.size());
  m4 /= static_cast<double>(e.size());
  if (!(m2 > 0.0))
    throw std::domain_error("fit_ar: residual variance vanishes");
  fit.residuals = std::move(e);
  fit.sigma2 = m2;
  fit.eta = m4 / (m2 * m2);
  return fit;
}

SeriesSample simulate_ar_sieve(const ARFit& fit, std::size_t n, Engine& rng, std::size_t burn_in)
{
  const std::size_t p = fit.order;
  std::uniform_int_distribution<std::size_t> pick(0, fit.residuals.size() - 1);
  std::vector<double> path(p + burn_in + n, 0.0);
  for (std::size_t t = p; t < path.size(); ++t) {
    double v = fit.residuals[pick(rng)];
    for (std::size_t j = 1; j <= p; ++j)
      v += fit.coefficients[j - 1] * path[t - j];
    path[t] = v;
  }
  return SeriesSample(std::vector<double>(path.end() - static_cast<std::ptrdiff_t>(n), path.end()));
}

double tau2_subsample(const SeriesSample& x,
                      const SpectralEstimate& fhat,
                      const PhiFunction& phi,
                      std::size_t b)
{
  const auto sub = subsample_periodograms(x, b);
  const auto resid = subsample_residuals(sub);
  const auto f = fhat.floored(sub.grid());
  const auto w = phi.on_grid(sub.grid());
  return subsample_double_sum(resid, sub.grid(), w, f) -
         subsample_diagonal_sum(resid, sub.grid(), w, f);
}

std::vector<std::size_t> default_block_grid(std::size_t n)
{
  const double root = std::cbrt(static_cast<double>(n));
  const auto lo = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(root + 1e-9)));
  const auto hi = std::min<std::size_t>(n / 2, static_cast<std::size_t>(std::floor(3.0 * root + 1e-9)));
  std::vector<std::size_t> out;
  for (std::size_t b = lo; b <= hi; b += 2)
    out.push_back(b);
  return out;
}

BlockSelectionReport select_block_length(const SeriesSample& x,
                                         const PhiFunction& phi,
                                         std::span<const std::size_t> blocks,
                                         std::size_t replicates,
                                         std::uint64_t seed,
                                         std::optional<std::size_t> max_order)
{
  if (blocks.empty())
    throw std::invalid_argument("select_block_length: empty block grid");
  if (replicates == 0)
    throw std::invalid_argument("select_block_length: need at least one replicate");
  const std::size_t n = x.size();
  for (auto b : blocks)
    if (b < 2 || 2 * b > n)
      throw std::invalid_argument("select_block_length: blocks must satisfy 2 <= b <= n/2");

  BlockSelectionReport report;
  report.fit = fit_ar(x, max_order);
  report.blocks.assign(blocks.begin(), blocks.end());
  report.replicates = replicates;
  const SpectralEstimate f_ar = report.fit.as_estimate();
  const double phi_mass =
    integrate_over_circle([&](double l) { return phi(l) * f_ar(l); }, phi);
  report.target = (report.fit.eta - 3.0) * phi_mass * phi_mass;

  const std::size_t nb = blocks.size();
  std::vector<double> tau(replicates * nb);
  const auto count = static_cast<std::ptrdiff_t>(replicates);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t l = 0; l < count; ++l) {
    Engine rng = make_stream(seed, stream_tag::ar_sieve, static_cast<std::uint64_t>(l));
    const SeriesSample pseudo = simulate_ar_sieve(report.fit, n, rng);
    for (std::size_t i = 0; i < nb; ++i)
      tau[static_cast<std::size_t>(l) * nb + i] = tau2_subsample(pseudo, f_ar, phi, blocks[i]);
  }

  report.mse.assign(nb, 0.0);
  report.mean_tau2.assign(nb, 0.0);
  for (std::size_t l = 0; l < replicates; ++l)
    for (std::size_t i = 0; i < nb; ++i) {
      const double v = tau[l * nb + i];
      report.mean_tau2[i] += v;
      report.mse[i] += (v - report.target) * (v - report.target);
    }
  std::size_t best = 0;
  for (std::size_t i = 0; i < nb; ++i) {
    report.mean_tau2[i] /= static_cast<double>(replicates);
    report.mse[i] /= static_cast<double>(replicates);
  }
  for (std::size_t i = 1; i < nb; ++i)
    if (report.mse[i] < report.mse[best] ||
        (report.mse[i] == report.mse[best] && report.blocks[i] < report.blocks[best]))
      best = i;
  report.selected = report.blocks[best];
  return report;
}

} // namespace fdb
