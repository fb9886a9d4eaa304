#include "fdb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fdb {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double two_pi = 2.0 * std::numbers::pi;

} // namespace

// ---------------------------------------------------------------- phi

PhiFunction::PhiFunction(Kind kind, double param)
  : kind_(kind)
  , param_(param)
{}

PhiFunction PhiFunction::cos_lag(unsigned lag)
{
  return PhiFunction(Kind::cos_lag, static_cast<double>(lag));
}

PhiFunction PhiFunction::indicator(double upper)
{
  if (!(upper > 0.0 && upper <= pi))
    throw std::invalid_argument("PhiFunction::indicator: x must lie in (0, pi]");
  return PhiFunction(Kind::indicator, upper);
}

PhiFunction PhiFunction::constant_one()
{
  return PhiFunction(Kind::constant_one, 0.0);
}

PhiFunction PhiFunction::tabulated(const FourierGrid& grid, std::vector<double> values)
{
  if (values.size() != grid.size())
    throw std::invalid_argument("PhiFunction::tabulated: one value per grid position required");
  PhiFunction phi(Kind::tabulated, static_cast<double>(grid.order()));
  phi.table_grid_ = grid;
  phi.table_ = std::move(values);
  return phi;
}

PhiFunction PhiFunction::parse(const std::string& text)
{
  if (text == "one")
    return constant_one();
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("cannot parse phi '" + text + "'");
  const std::string head = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  if (head == "cos") {
    const long lag = std::stol(arg);
    if (lag < 0)
      throw std::invalid_argument("cos lag must be nonnegative");
    return cos_lag(static_cast<unsigned>(lag));
  }
  if (head == "indicator")
    return indicator(std::stod(arg));
  throw std::invalid_argument("unknown phi kind '" + head + "'");
}

PhiFunction PhiFunction::scaled(double c) const
{
  PhiFunction out = *this;
  out.scale_ *= c;
  return out;
}

std::string PhiFunction::describe() const
{
  std::ostringstream os;
  if (scale_ != 1.0)
    os << scale_ << "*";
  switch (kind_) {
    case Kind::cos_lag:
      os << "cos:" << static_cast<unsigned>(param_);
      break;
    case Kind::indicator:
      os << "indicator:" << param_;
      break;
    case Kind::constant_one:
      os << "one";
      break;
    case Kind::tabulated:
      os << "tabulated:" << static_cast<std::size_t>(param_);
      break;
  }
  return os.str();
}

double PhiFunction::operator()(double lambda) const
{
  double v = 0.0;
  switch (kind_) {
    case Kind::cos_lag:
      v = std::cos(param_ * lambda);
      break;
    case Kind::indicator:
      // right-closed (0, x]; slack absorbs rounding of 2 pi j / m at x
      v = (lambda > 0.0 && lambda <= param_ * (1.0 + 1e-12)) ? 1.0 : 0.0;
      break;
    case Kind::constant_one:
      v = 1.0;
      break;
    case Kind::tabulated: {
      const auto& g = *table_grid_;
      const double m = static_cast<double>(g.order());
      const long j = std::lround(lambda * m / two_pi);
      if (j == 0 || std::abs(j) > static_cast<long>(g.half()) ||
          std::abs(lambda - two_pi * static_cast<double>(j) / m) > 1e-9)
        throw std::domain_error("tabulated phi evaluated off its grid");
      v = table_[g.position(static_cast<int>(j))];
      break;
    }
  }
  return scale_ * v;
}

std::vector<double> PhiFunction::on_grid(const FourierGrid& grid) const
{
  if (kind_ == Kind::tabulated && table_grid_->order() == grid.order()) {
    std::vector<double> out = table_;
    for (auto& v : out)
      v *= scale_;
    return out;
  }
  std::vector<double> out(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    out[p] = (*this)(grid.frequency(p));
  return out;
}

std::vector<double> PhiFunction::breakpoints() const
{
  if (kind_ == Kind::indicator) {
    if (param_ < pi)
      return { 0.0, param_ };
    return { 0.0 };
  }
  return {};
}

std::string to_string(StatisticKind k)
{
  return k == StatisticKind::mean ? "mean" : "ratio";
}

StatisticKind parse_statistic_kind(const std::string& s)
{
  if (s == "mean")
    return StatisticKind::mean;
  if (s == "ratio")
    return StatisticKind::ratio;
  throw std::invalid_argument("unknown statistic kind '" + s + "'");
}

// ---------------------------------------------------------------- statistics

SpectralMeanResult spectral_mean(const PhiFunction& phi,
                                 const FourierGrid& grid,
                                 std::span<const double> values)
{
  if (values.size() != grid.size())
    throw std::invalid_argument("spectral_mean: values do not match the grid");
  const auto w = phi.on_grid(grid);
  double s = 0.0;
  for (std::size_t p = 0; p < w.size(); ++p)
    s += w[p] * values[p];
  return { two_pi / static_cast<double>(grid.order()) * s, StatisticKind::mean, grid.order() };
}

SpectralMeanResult spectral_mean(const PhiFunction& phi, const Periodogram& pg)
{
  return spectral_mean(phi, pg.grid, pg.values);
}

SpectralMeanResult ratio_statistic(const PhiFunction& phi,
                                   const FourierGrid& grid,
                                   std::span<const double> values)
{
  if (values.size() != grid.size())
    throw std::invalid_argument("ratio_statistic: values do not match the grid");
  const auto w = phi.on_grid(grid);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t p = 0; p < w.size(); ++p) {
    num += w[p] * values[p];
    den += values[p];
  }
  if (!(den > 0.0))
    throw std::domain_error("ratio_statistic: denominator is not positive");
  return { num / den, StatisticKind::ratio, grid.order() };
}

SpectralMeanResult ratio_statistic(const PhiFunction& phi, const Periodogram& pg)
{
  return ratio_statistic(phi, pg.grid, pg.values);
}

double integrated_spectral_mean(const PhiFunction& phi, const SeriesSample& x)
{
  const std::size_t n = x.size();
  if (n < 2)
    throw std::invalid_argument("integrated_spectral_mean: need at least two observations");
  const double c = phi.scale();
  switch (phi.kind()) {
    case PhiFunction::Kind::constant_one:
      return c * autocovariances(x, 0)[0];
    case PhiFunction::Kind::cos_lag: {
      const auto h = static_cast<std::size_t>(phi.parameter());
      if (h >= n)
        return 0.0;
      const auto g = autocovariances(x, h);
      return h == 0 ? c * g[0] : c * g[h];
    }
    case PhiFunction::Kind::indicator: {
      // int_0^u I_n = (2 pi)^{-1} sum_{|h|<n} gamma(h) int_0^u cos(h l) dl
      const double u = phi.parameter();
      const auto g = autocovariances(x, n - 1);
      double s = g[0] * u;
      for (std::size_t h = 1; h < n; ++h)
        s += 2.0 * g[h] * std::sin(static_cast<double>(h) * u) / static_cast<double>(h);
      return c * s / (2.0 * std::numbers::pi);
    }
    case PhiFunction::Kind::tabulated:
      break;
  }
  throw std::invalid_argument("integrated_spectral_mean: tabulated phi has no integral form");
}

double integrated_ratio_statistic(const PhiFunction& phi, const SeriesSample& x)
{
  const double mass = autocovariances(x, 0)[0];
  if (!(mass > 0.0))
    throw std::domain_error("integrated_ratio_statistic: series has zero variance");
  return integrated_spectral_mean(phi, x) / mass;
}

RatioWeights ratio_weights(const PhiFunction& phi,
                           const FourierGrid& grid,
                           std::span<const double> fhat)
{
  if (fhat.size() != grid.size())
    throw std::invalid_argument("ratio_weights: estimate does not match the grid");
  const auto ph = phi.on_grid(grid);
  const double step = two_pi / static_cast<double>(grid.order());
  double mass = 0.0;
  double phi_mass = 0.0;
  for (std::size_t p = 0; p < ph.size(); ++p) {
    mass += fhat[p];
    phi_mass += ph[p] * fhat[p];
  }
  mass *= step;
  phi_mass *= step;
  std::vector<double> w(ph.size());
  for (std::size_t p = 0; p < ph.size(); ++p)
    w[p] = ph[p] * mass - phi_mass;
  return RatioWeights{ phi, grid, mass, phi_mass, std::move(w) };
}

RatioWeights ratio_weights(const PhiFunction& phi, const SpectralEstimate& fhat, std::size_t order)
{
  const FourierGrid grid(order);
  const auto f = fhat.floored(grid);
  return ratio_weights(phi, grid, f);
}

// ---------------------------------------------------------------- quadrature

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t intervals)
{
  if (intervals < 2)
    intervals = 2;
  if (intervals % 2 == 1)
    ++intervals;
  const double h = (b - a) / static_cast<double>(intervals);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i)
    s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return s * h / 3.0;
}

double integrate_over_circle(const std::function<double(double)>& f,
                             const PhiFunction& phi,
                             std::size_t intervals)
{
  std::vector<double> cuts{ -pi };
  for (double c : phi.breakpoints())
    cuts.push_back(c);
  cuts.push_back(pi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    // evaluate just inside each piece so one-sided limits are used at jumps
    const double eps = 1e-9 * (b - a);
    const auto inner = [&](double x) { return f(std::clamp(x, a + eps, b - eps)); };
    total += simpson(inner, a, b, intervals);
  }
  return total;
}

// ---------------------------------------------------------------- oracles

double LinearModelOracle::spectral_density(double lambda) const
{
  double re = 0.0;
  double im = 0.0;
  for (std::size_t j = 0; j < ma.size(); ++j) {
    re += ma[j] * std::cos(lambda * static_cast<double>(j));
    im -= ma[j] * std::sin(lambda * static_cast<double>(j));
  }
  return sigma2 / two_pi * (re * re + im * im);
}

double LinearModelOracle::autocovariance(std::size_t lag) const
{
  double s = 0.0;
  for (std::size_t j = 0; j + lag < ma.size(); ++j)
    s += ma[j] * ma[j + lag];
  return sigma2 * s;
}

AsymptoticVariance linear_asymptotic_variance(const LinearModelOracle& oracle,
                                              const PhiFunction& phi)
{
  if (oracle.eta < 1.0)
    throw std::invalid_argument("linear_asymptotic_variance: kurtosis ratio below 1");
  if (oracle.ma.empty())
    throw std::invalid_argument("linear_asymptotic_variance: no MA coefficients");
  const auto f = [&](double l) { return oracle.spectral_density(l); };

  const double tau1_sq = two_pi * integrate_over_circle(
                                    [&](double l) {
                                      const double fl = f(l);
                                      return phi(l) * (phi(l) + phi(-l)) * fl * fl;
                                    },
                                    phi);
  const double phi_mass = integrate_over_circle([&](double l) { return phi(l) * f(l); }, phi);
  const double tau2 = (oracle.eta - 3.0) * phi_mass * phi_mass;

  const double mass = oracle.autocovariance(0); // M(1, f) = gamma(0)
  const auto w = [&](double l) { return phi(l) * mass - phi_mass; };
  const double m4 = mass * mass * mass * mass;
  const double tau1_ratio_sq = two_pi / m4 *
                               integrate_over_circle(
                                 [&](double l) {
                                   const double fl = f(l);
                                   return w(l) * (w(l) + w(-l)) * fl * fl;
                                 },
                                 phi);
  return AsymptoticVariance{ tau1_sq, tau2, tau1_sq + tau2, tau1_ratio_sq, 0.0, tau1_ratio_sq };
}

} // namespace fdb
