#include "fdb/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fdb {

ModelSpec ModelSpec::defaults(ModelId id)
{
  ModelSpec spec;
  spec.model = id;
  spec.innovation = id == ModelId::I ? Innovation::centered_exponential
                                     : Innovation::standard_normal;
  return spec;
}

void ModelSpec::validate() const
{
  if (!(a0 > 0.0))
    throw std::invalid_argument("ModelSpec: a0 must be positive");
  if (!(a1 >= 0.0 && a1 < 1.0))
    throw std::invalid_argument("ModelSpec: ARCH coefficient a1 must lie in [0, 1)");
  if (burn_in < 100)
    throw std::invalid_argument("ModelSpec: burn_in must be at least 100");
}

SeriesSample::SeriesSample(std::vector<double> v, bool is_centered)
  : values(std::move(v))
  , centered(is_centered)
{}

double SeriesSample::mean() const
{
  if (values.empty())
    return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

SeriesSample SeriesSample::centered_copy() const
{
  if (centered)
    return *this;
  SeriesSample out(values, true);
  const double m = mean();
  for (auto& v : out.values)
    v -= m;
  return out;
}

ModelId parse_model(const std::string& text)
{
  std::string name = text;
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
  if (name == "I" || name == "1")
    return ModelId::I;
  if (name == "II" || name == "2")
    return ModelId::II;
  if (name == "III" || name == "3")
    return ModelId::III;
  if (name == "IV" || name == "4")
    return ModelId::IV;
  throw std::invalid_argument("unknown model '" + text + "'");
}

std::string to_string(ModelId id)
{
  switch (id) {
    case ModelId::I:
      return "I";
    case ModelId::II:
      return "II";
    case ModelId::III:
      return "III";
    case ModelId::IV:
      return "IV";
  }
  return "?";
}

std::vector<double> generate_innovations(Innovation kind,
                                         std::size_t count,
                                         Engine& rng)
{
  if (count == 0)
    throw std::invalid_argument("generate_innovations: count must be positive");
  std::vector<double> out(count);
  if (kind == Innovation::standard_normal) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : out)
      v = normal(rng);
  } else {
    std::exponential_distribution<double> expo(1.0);
    for (auto& v : out)
      v = expo(rng) - 1.0;
  }
  return out;
}

std::vector<double> filter_innovations(const ModelSpec& spec,
                                       std::span<const double> eps)
{
  spec.validate();
  const std::size_t len = eps.size();
  std::vector<double> x(len);
  switch (spec.model) {
    case ModelId::I: {
      double prev = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        x[t] = eps[t] + spec.theta * prev;
        prev = eps[t];
      }
      break;
    }
    case ModelId::II: {
      // ARCH(1) on u_t, rescaled to unit variance: v_t = u_t / sqrt(0.6).
      const double scale = 1.0 / std::sqrt(0.6);
      double u_prev = 0.0;
      double v_prev = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        const double u = eps[t] * std::sqrt(spec.a0 + spec.a1 * u_prev * u_prev);
        const double v = u * scale;
        x[t] = v + spec.theta * v_prev;
        u_prev = u;
        v_prev = v;
      }
      break;
    }
    case ModelId::III: {
      double e_prev = 0.0;
      double z_prev = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        const double z = eps[t] * e_prev;
        x[t] = z + spec.theta * z_prev;
        e_prev = eps[t];
        z_prev = z;
      }
      break;
    }
    case ModelId::IV: {
      double prev = 0.0; // X_0 = 0
      for (std::size_t t = 0; t < len; ++t) {
        x[t] = spec.phi * std::sin(prev) + eps[t];
        prev = x[t];
      }
      break;
    }
  }
  return x;
}

SeriesSample simulate_model(const ModelSpec& spec, std::size_t n, Engine& rng)
{
  if (n < 4)
    throw std::invalid_argument("simulate_model: n must be at least 4");
  spec.validate();
  const auto eps = generate_innovations(spec.innovation, spec.burn_in + n, rng);
  auto full = filter_innovations(spec, eps);
  return SeriesSample(std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(spec.burn_in),
                                          full.end()));
}

} // namespace fdb
