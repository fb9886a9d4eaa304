#include "fdb/spectral.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdb {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace

// ---------------------------------------------------------------- grid

FourierGrid::FourierGrid(std::size_t order)
  : order_(order)
{
  if (order < 2)
    throw std::invalid_argument("FourierGrid: order must be at least 2");
}

int FourierGrid::index(std::size_t pos) const noexcept
{
  const auto h = static_cast<int>(half());
  const auto p = static_cast<int>(pos);
  return p < h ? p - h : p - h + 1;
}

std::size_t FourierGrid::position(int j) const
{
  const auto h = static_cast<int>(half());
  if (j == 0 || j > h || j < -h)
    throw std::out_of_range("FourierGrid: index outside G(m)");
  return static_cast<std::size_t>(j < 0 ? j + h : j + h - 1);
}

double FourierGrid::frequency(std::size_t pos) const noexcept
{
  const int j = index(pos);
  const double mag = two_pi * static_cast<double>(j < 0 ? -j : j) /
                     static_cast<double>(order_);
  return j < 0 ? -mag : mag;
}

std::vector<int> FourierGrid::indices() const
{
  std::vector<int> out(size());
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = index(p);
  return out;
}

std::vector<double> FourierGrid::frequencies() const
{
  std::vector<double> out(size());
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = frequency(p);
  return out;
}

FourierGrid fourier_grid(std::size_t m)
{
  return FourierGrid(m);
}

// ---------------------------------------------------------------- periodograms

namespace {

/// Periodogram of `x` written into `out` (size 2*floor(m/2)), mirrored.
void periodogram_into(std::span<const double> x, std::span<double> out)
{
  const std::size_t m = x.size();
  const std::size_t h = m / 2;
  thread_local std::vector<double> half_buf;
  half_buf.resize(h);
  detail::squared_dft_magnitudes(x, half_buf);
  const double scale = 1.0 / (two_pi * static_cast<double>(m));
  for (std::size_t j = 1; j <= h; ++j) {
    const double v = half_buf[j - 1] * scale;
    out[h - 1 + j] = v; // +j
    out[h - j] = v;     // -j
  }
}

} // namespace

Periodogram periodogram(const SeriesSample& x, const FourierGrid& grid)
{
  if (x.size() == 0)
    throw std::invalid_argument("periodogram: empty series");
  if (grid.order() != x.size())
    throw std::invalid_argument("periodogram: grid order must equal series length");
  const SeriesSample xc = x.centered_copy();
  Periodogram pg{ grid, std::vector<double>(grid.size()) };
  periodogram_into(xc.view(), pg.values);
  return pg;
}

Periodogram periodogram(const SeriesSample& x)
{
  if (x.size() < 2)
    throw std::invalid_argument("periodogram: series needs at least two values");
  return periodogram(x, FourierGrid(x.size()));
}

SubsamplePeriodogramMatrix::SubsamplePeriodogramMatrix(std::size_t block_length,
                                                       std::size_t count,
                                                       std::vector<double> values)
  : grid_(block_length)
  , count_(count)
  , values_(std::move(values))
  , f_tilde_(grid_.size(), 0.0)
{
  if (count_ == 0 || values_.size() != count_ * grid_.size())
    throw std::invalid_argument("SubsamplePeriodogramMatrix: shape mismatch");
  const std::size_t cols = grid_.size();
  for (std::size_t t = 0; t < count_; ++t)
    for (std::size_t p = 0; p < cols; ++p)
      f_tilde_[p] += values_[t * cols + p];
  for (auto& v : f_tilde_)
    v /= static_cast<double>(count_);
}

std::span<const double> SubsamplePeriodogramMatrix::row(std::size_t t) const
{
  return std::span<const double>(values_).subspan(t * grid_.size(), grid_.size());
}

SubsamplePeriodogramMatrix subsample_periodograms(const SeriesSample& x,
                                                  std::size_t b)
{
  const std::size_t n = x.size();
  if (b < 2)
    throw std::invalid_argument("subsample_periodograms: block length must be at least 2");
  if (b > n)
    throw std::invalid_argument("subsample_periodograms: block length exceeds series length");
  const SeriesSample xc = x.centered_copy();
  const std::size_t count = n - b + 1;
  const std::size_t cols = 2 * (b / 2);
  std::vector<double> values(count * cols);
  for (std::size_t t = 0; t < count; ++t)
    periodogram_into(xc.view().subspan(t, b),
                     std::span<double>(values).subspan(t * cols, cols));
  return SubsamplePeriodogramMatrix(b, count, std::move(values));
}

std::vector<double> autocovariances(const SeriesSample& x, std::size_t max_lag)
{
  const std::size_t n = x.size();
  if (max_lag >= n)
    throw std::invalid_argument("autocovariances: lag must be below series length");
  const SeriesSample xc = x.centered_copy();
  const auto& v = xc.values;
  std::vector<double> g(max_lag + 1, 0.0);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    double s = 0.0;
    for (std::size_t t = 0; t + h < n; ++t)
      s += v[t] * v[t + h];
    g[h] = s / static_cast<double>(n);
  }
  return g;
}

// ---------------------------------------------------------------- estimates

std::string to_string(EstimatorMethod m)
{
  switch (m) {
    case EstimatorMethod::averaged_subsample:
      return "averaged-subsample";
    case EstimatorMethod::parzen_lag_window:
      return "parzen-lag-window";
    case EstimatorMethod::kernel_smoothed:
      return "kernel-smoothed";
    case EstimatorMethod::external:
      return "external";
  }
  return "?";
}

SpectralEstimate::SpectralEstimate(EstimatorMethod method, double tuning, Evaluator eval)
  : method_(method)
  , tuning_(tuning)
  , eval_(std::move(eval))
{
  if (!eval_)
    throw std::invalid_argument("SpectralEstimate: empty evaluator");
}

double SpectralEstimate::operator()(double lambda) const
{
  return eval_(std::abs(lambda));
}

std::vector<double> SpectralEstimate::evaluate(const FourierGrid& grid) const
{
  std::vector<double> out(grid.size());
  const std::size_t h = grid.half();
  for (std::size_t j = 1; j <= h; ++j) {
    const double v = (*this)(grid.frequency(grid.positive_position(j)));
    out[h - 1 + j] = v;
    out[h - j] = v;
  }
  return out;
}

std::vector<double> SpectralEstimate::floored(const FourierGrid& grid) const
{
  auto out = evaluate(grid);
  apply_positivity_floor(out);
  return out;
}

void apply_positivity_floor(std::span<double> values)
{
  double mx = 0.0;
  for (double v : values) {
    if (!std::isfinite(v))
      throw std::domain_error("spectral estimate is not finite");
    mx = std::max(mx, v);
  }
  if (!(mx > 0.0))
    throw std::domain_error("degenerate spectral estimate: no positive values");
  const double floor = positivity_floor_ratio * mx;
  for (auto& v : values)
    v = std::max(v, floor);
}

double parzen_window(double u) noexcept
{
  u = std::abs(u);
  if (u <= 0.5)
    return 1.0 - 6.0 * u * u + 6.0 * u * u * u;
  if (u <= 1.0) {
    const double r = 1.0 - u;
    return 2.0 * r * r * r;
  }
  return 0.0;
}

double epanechnikov_kernel(double u) noexcept
{
  return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

namespace {

/// (2 pi)^{-1} [c_0 + 2 sum_h c_h cos(h lambda)]
double cosine_series(const std::vector<double>& c, double lambda)
{
  double s = c[0];
  for (std::size_t h = 1; h < c.size(); ++h)
    s += 2.0 * c[h] * std::cos(static_cast<double>(h) * lambda);
  return s / two_pi;
}

} // namespace

SpectralEstimate parzen_lag_window(const SeriesSample& x, std::size_t lag)
{
  if (lag < 1 || lag >= x.size())
    throw std::invalid_argument("parzen_lag_window: truncation lag must satisfy 1 <= M < n");
  auto coef = autocovariances(x, lag);
  for (std::size_t h = 0; h <= lag; ++h)
    coef[h] *= parzen_window(static_cast<double>(h) / static_cast<double>(lag));
  return SpectralEstimate(EstimatorMethod::parzen_lag_window, static_cast<double>(lag),
                          [c = std::move(coef)](double lambda) { return cosine_series(c, lambda); });
}

SpectralEstimate averaged_subsample_estimate(const SeriesSample& x, std::size_t b)
{
  const std::size_t n = x.size();
  if (b < 2 || b > n)
    throw std::invalid_argument("averaged_subsample_estimate: need 2 <= b <= n");
  const SeriesSample xc = x.centered_copy();
  const auto& v = xc.values;
  const std::size_t count = n - b + 1;
  // c_h = (b N)^{-1} sum_t sum_{s < b-h} x_{t+s} x_{t+s+h}; each product
  // x_u x_{u+h} appears once per start t in [u-(b-h)+1, u] within [0, N-1].
  std::vector<double> coef(b, 0.0);
  for (std::size_t h = 0; h < b; ++h) {
    const std::size_t len = b - h;
    double s = 0.0;
    for (std::size_t u = 0; u + h < n; ++u) {
      const std::size_t lo = u + 1 >= len ? u + 1 - len : 0;
      const std::size_t hi = std::min(count - 1, u);
      if (hi < lo)
        continue;
      s += static_cast<double>(hi - lo + 1) * v[u] * v[u + h];
    }
    coef[h] = s / (static_cast<double>(b) * static_cast<double>(count));
  }
  return SpectralEstimate(EstimatorMethod::averaged_subsample, static_cast<double>(b),
                          [c = std::move(coef)](double lambda) { return cosine_series(c, lambda); });
}

bool kernel_weights(const FourierGrid& grid,
                    double lambda,
                    double bandwidth,
                    std::span<double> weights,
                    std::span<const std::size_t> excluded)
{
  double total = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double d = std::remainder(lambda - grid.frequency(p), two_pi);
    weights[p] = epanechnikov_kernel(d / bandwidth);
  }
  for (auto p : excluded)
    weights[p] = 0.0;
  for (double w : weights)
    total += w;
  if (!(total > 0.0))
    return false;
  for (auto& w : weights)
    w /= total;
  return true;
}

SpectralEstimate kernel_smoothed_estimate(const SeriesSample& x, double bandwidth)
{
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("kernel_smoothed_estimate: bandwidth must be positive");
  const std::size_t n = x.size();
  if (!(bandwidth > two_pi / static_cast<double>(n)))
    throw std::invalid_argument("kernel_smoothed_estimate: bandwidth below the Fourier grid spacing");
  auto pg = std::make_shared<const Periodogram>(periodogram(x));
  return SpectralEstimate(EstimatorMethod::kernel_smoothed, bandwidth,
                          [pg, bandwidth](double lambda) {
                            std::vector<double> w(pg->grid.size());
                            if (!kernel_weights(pg->grid, lambda, bandwidth, w))
                              return 0.0;
                            double s = 0.0;
                            for (std::size_t p = 0; p < w.size(); ++p)
                              s += w[p] * pg->values[p];
                            return s;
                          });
}

SpectralEstimate external_estimate(SpectralEstimate::Evaluator eval, double tuning)
{
  return SpectralEstimate(EstimatorMethod::external, tuning, std::move(eval));
}

// ---------------------------------------------------------------- residuals

ResidualMatrix subsample_residuals(const SubsamplePeriodogramMatrix& sub)
{
  std::vector<double> denom(sub.f_tilde().begin(), sub.f_tilde().end());
  apply_positivity_floor(denom);
  ResidualMatrix r{ ResidualScheme::subsample, sub.count(), sub.grid().size(), {} };
  r.values.resize(r.rows * r.cols);
  for (std::size_t t = 0; t < r.rows; ++t)
    for (std::size_t p = 0; p < r.cols; ++p)
      r.values[t * r.cols + p] = sub.at(t, p) / denom[p];
  return r;
}

ResidualMatrix mpb_residuals(const Periodogram& pg, const SpectralEstimate& fhat)
{
  const auto f = fhat.floored(pg.grid);
  const std::size_t h = pg.grid.half();
  ResidualMatrix r{ ResidualScheme::mpb_empirical, 1, h, std::vector<double>(h) };
  double mean = 0.0;
  for (std::size_t j = 1; j <= h; ++j) {
    const std::size_t p = pg.grid.positive_position(j);
    r.values[j - 1] = pg.values[p] / f[p];
    mean += r.values[j - 1];
  }
  mean /= static_cast<double>(h);
  if (!(mean > 0.0))
    throw std::domain_error("mpb_residuals: periodogram vanishes on G(n)");
  for (auto& u : r.values)
    u /= mean;
  return r;
}

} // namespace fdb
