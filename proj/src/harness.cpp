#include "fdb/harness.hpp"

#include "fdb/rng.hpp"
#include "fdb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fdb {

namespace {

constexpr std::uint64_t method_key(Method m)
{
  return 0x100 + static_cast<std::uint64_t>(m);
}

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!trim(item).empty())
      out.push_back(trim(item));
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v)
{
  std::size_t pos = 0;
  const long long x = std::stoll(v, &pos);
  if (pos != v.size() || x < 0)
    throw std::invalid_argument("config: '" + key + "' expects a nonnegative integer");
  return static_cast<std::size_t>(x);
}

double to_real(const std::string& key, const std::string& v)
{
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (pos != v.size())
    throw std::invalid_argument("config: '" + key + "' expects a number");
  return x;
}

double sd_of(std::span<const double> v)
{
  if (v.size() < 2)
    return 0.0;
  double m = 0.0;
  for (double x : v)
    m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v)
    s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double mean_of(std::span<const double> v)
{
  double m = 0.0;
  for (double x : v)
    m += x;
  return v.empty() ? 0.0 : m / static_cast<double>(v.size());
}

double reference_statistic(const ExperimentConfig& c, const SeriesSample& x)
{
  return c.statistic == StatisticKind::mean ? integrated_spectral_mean(c.phi, x)
                                            : integrated_ratio_statistic(c.phi, x);
}

} // namespace

// ---------------------------------------------------------------- samples

DistributionSample::DistributionSample(std::vector<double> values)
  : values_(std::move(values))
{
  std::sort(values_.begin(), values_.end());
}

double DistributionSample::mean() const
{
  return mean_of(values_);
}

double DistributionSample::variance() const
{
  const double s = sd_of(values_);
  return s * s;
}

double DistributionSample::sd() const
{
  return sd_of(values_);
}

double d1_distance(const DistributionSample& a, const DistributionSample& b)
{
  if (a.empty() || b.empty())
    throw std::invalid_argument("d1_distance: empty sample");
  const auto x = a.values();
  const auto y = b.values();
  const std::uint64_t na = x.size();
  const std::uint64_t nb = y.size();
  // Breakpoints i/na and j/nb compared exactly as i*nb vs j*na.
  std::size_t i = 0, j = 0;
  double prev = 0.0;
  double total = 0.0;
  while (i < na && j < nb) {
    const std::uint64_t ea = (i + 1) * nb;
    const std::uint64_t eb = (j + 1) * na;
    const double next = ea <= eb ? static_cast<double>(i + 1) / static_cast<double>(na)
                                 : static_cast<double>(j + 1) / static_cast<double>(nb);
    total += std::abs(x[i] - y[j]) * (next - prev);
    prev = next;
    if (ea <= eb)
      ++i;
    if (eb <= ea)
      ++j;
  }
  return total;
}

// ---------------------------------------------------------------- config

std::string to_string(Method m)
{
  switch (m) {
    case Method::mpb:
      return "MPB";
    case Method::cbp:
      return "CBP";
    case Method::hpb:
      return "HPB";
  }
  return "?";
}

Method parse_method(const std::string& s)
{
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::tolower(c); });
  if (u == "mpb")
    return Method::mpb;
  if (u == "cbp")
    return Method::cbp;
  if (u == "hpb" || u == "hybrid")
    return Method::hpb;
  throw std::invalid_argument("unknown method '" + s + "'");
}

void ExperimentConfig::validate() const
{
  model.validate();
  if (n < 4)
    throw std::invalid_argument("config: n must be at least 4");
  if (methods.empty() || blocks.empty())
    throw std::invalid_argument("config: methods and b must be nonempty");
  for (auto b : blocks)
    if (b < 2 || b > n)
      throw std::invalid_argument("config: b must lie in [2, n]");
  if (bootstrap_reps < 2 || replications < 1 || reference_reps < 1 || batches < 1 || truth_samples < 1000)
    throw std::invalid_argument("config: counts must be positive (M >= 2, truth_samples >= 1000)");
  if (parzen_lag == 0 && !(bandwidth > 0.0))
    throw std::invalid_argument("config: need lag >= 1 or a positive bandwidth");
  if (parzen_lag >= n)
    throw std::invalid_argument("config: lag must be below n");
}

std::vector<std::size_t> parse_block_list(const std::string& text)
{
  std::vector<std::size_t> out;
  const auto colon = split(text, ':');
  if (colon.size() == 3 && text.find(',') == std::string::npos) {
    const auto lo = to_count("b", colon[0]);
    const auto hi = to_count("b", colon[1]);
    const auto step = to_count("b", colon[2]);
    if (step == 0 || hi < lo)
      throw std::invalid_argument("block range must satisfy lo <= hi and step >= 1");
    for (auto b = lo; b <= hi; b += step)
      out.push_back(b);
    return out;
  }
  for (const auto& item : split(text, ','))
    out.push_back(to_count("b", item));
  if (out.empty())
    throw std::invalid_argument("empty block list");
  return out;
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig c)
{
  std::istringstream in(text);
  std::string line;
  ModelSpec overrides = c.model;
  std::map<std::string, std::string> model_keys;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "model") {
      overrides = ModelSpec::defaults(parse_model(v));
    } else if (key == "theta" || key == "phi_ar" || key == "a0" || key == "a1" || key == "innovation" ||
               key == "burn_in") {
      model_keys[key] = v;
    } else if (key == "n") {
      c.n = to_count(key, v);
    } else if (key == "phi") {
      c.phi = PhiFunction::parse(v);
    } else if (key == "statistic") {
      c.statistic = parse_statistic_kind(v);
    } else if (key == "methods") {
      c.methods.clear();
      for (const auto& m : split(v, ','))
        c.methods.push_back(parse_method(m));
    } else if (key == "b") {
      c.blocks = parse_block_list(v);
    } else if (key == "M") {
      c.bootstrap_reps = to_count(key, v);
    } else if (key == "R") {
      c.replications = to_count(key, v);
    } else if (key == "reference_reps") {
      c.reference_reps = to_count(key, v);
    } else if (key == "lag") {
      c.parzen_lag = to_count(key, v);
    } else if (key == "bandwidth") {
      c.bandwidth = to_real(key, v);
    } else if (key == "truth_samples") {
      c.truth_samples = to_count(key, v);
    } else if (key == "batches") {
      c.batches = to_count(key, v);
    } else if (key == "seed") {
      c.seed = to_count(key, v);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  for (const auto& [key, v] : model_keys) {
    if (key == "theta")
      overrides.theta = to_real(key, v);
    else if (key == "phi_ar")
      overrides.phi = to_real(key, v);
    else if (key == "a0")
      overrides.a0 = to_real(key, v);
    else if (key == "a1")
      overrides.a1 = to_real(key, v);
    else if (key == "burn_in")
      overrides.burn_in = to_count(key, v);
    else if (v == "normal" || v == "gaussian")
      overrides.innovation = Innovation::standard_normal;
    else if (v == "exponential" || v == "exp")
      overrides.innovation = Innovation::centered_exponential;
    else
      throw std::invalid_argument("config: unknown innovation '" + v + "'");
  }
  c.model = overrides;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

// ---------------------------------------------------------------- truth

SpectralEstimate experiment_estimate(const ExperimentConfig& c, const SeriesSample& x)
{
  if (c.parzen_lag > 0)
    return parzen_lag_window(x, c.parzen_lag);
  return kernel_smoothed_estimate(x, c.bandwidth);
}

double true_parameter(const ExperimentConfig& c)
{
  const ModelSpec& m = c.model;
  std::function<double(double)> f;
  if (m.model != ModelId::IV) {
    // MA(1) filter of an uncorrelated sequence with variance s2.
    double s2 = 1.0;
    if (m.model == ModelId::II)
      s2 = m.a0 / ((1.0 - m.a1) * 0.6);
    const double theta = m.theta;
    f = [=](double l) {
      return s2 * (1.0 + theta * theta + 2.0 * theta * std::cos(l)) / (2.0 * std::numbers::pi);
    };
  } else {
    static std::mutex mu;
    static std::map<std::string, std::vector<double>> cache;
    std::ostringstream key;
    key << std::setprecision(17) << m.phi << '|' << static_cast<int>(m.innovation) << '|' << m.burn_in << '|'
        << c.truth_samples << '|' << c.seed;
    std::vector<double> gamma;
    {
      std::lock_guard lock(mu);
      auto it = cache.find(key.str());
      if (it == cache.end()) {
        Engine rng = make_stream(c.seed, stream_tag::truth);
        const SeriesSample path = simulate_model(m, c.truth_samples, rng);
        it = cache.emplace(key.str(), autocovariances(path, 200)).first;
      }
      gamma = it->second;
    }
    f = [g = std::move(gamma)](double l) {
      double s = g[0];
      for (std::size_t h = 1; h < g.size(); ++h)
        s += 2.0 * g[h] * std::cos(static_cast<double>(h) * l);
      return s / (2.0 * std::numbers::pi);
    };
  }
  const double phi_mass = integrate_over_circle([&](double l) { return c.phi(l) * f(l); }, c.phi);
  if (c.statistic == StatisticKind::mean)
    return phi_mass;
  const PhiFunction one = PhiFunction::constant_one();
  return phi_mass / integrate_over_circle(f, one);
}

DistributionSample reference_distribution(const ExperimentConfig& c)
{
  c.validate();
  const double truth = true_parameter(c);
  const double root_n = std::sqrt(static_cast<double>(c.n));
  std::vector<double> v(c.reference_reps);
  const auto reps = static_cast<std::ptrdiff_t>(c.reference_reps);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < reps; ++r) {
    Engine rng = make_stream(c.seed, stream_tag::reference, static_cast<std::uint64_t>(r));
    const SeriesSample x = simulate_model(c.model, c.n, rng);
    v[static_cast<std::size_t>(r)] = root_n * (reference_statistic(c, x) - truth);
  }
  return DistributionSample(std::move(v));
}

// ---------------------------------------------------------------- experiments

double batch_standard_error(std::span<const double> values, std::size_t batches)
{
  const std::size_t r = values.size();
  const std::size_t nb = std::min(batches, r);
  if (nb < 2)
    return 0.0;
  std::vector<double> means(nb, 0.0);
  for (std::size_t i = 0; i < nb; ++i) {
    const std::size_t lo = i * r / nb;
    const std::size_t hi = (i + 1) * r / nb;
    means[i] = mean_of(values.subspan(lo, hi - lo));
  }
  return sd_of(means) / std::sqrt(static_cast<double>(nb));
}

DistributionResult run_distribution_experiment(const ExperimentConfig& c)
{
  c.validate();
  DistributionResult out;
  out.reference = reference_distribution(c);
  const std::size_t nm = c.methods.size();
  const std::size_t nb = c.blocks.size();
  out.d1.assign(nm, std::vector<std::vector<double>>(nb, std::vector<double>(c.replications, 0.0)));

  const auto reps = static_cast<std::ptrdiff_t>(c.replications);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t rr = 0; rr < reps; ++rr) {
    const auto r = static_cast<std::uint64_t>(rr);
    Engine rng = make_stream(c.seed, stream_tag::series, r);
    const SeriesSample x = simulate_model(c.model, c.n, rng);
    const SpectralEstimate fhat = experiment_estimate(c, x);
    BootstrapOptions opt;
    opt.replicates = c.bootstrap_reps;
    opt.block_length = c.blocks.front();

    std::optional<DrawSet> mpb;
    auto mpb_set = [&](const FrequencyBootstrap& fb) -> const DrawSet& {
      if (!mpb)
        mpb = fb.mpb_draws(c.statistic, derive_key(c.seed, r, method_key(Method::mpb)));
      return *mpb;
    };
    for (std::size_t bi = 0; bi < nb; ++bi) {
      opt.block_length = c.blocks[bi];
      const FrequencyBootstrap fb(x, fhat, c.phi, opt);
      std::optional<DrawSet> cbp;
      auto cbp_set = [&]() -> const DrawSet& {
        if (!cbp)
          cbp = fb.cbp_draws(c.statistic, derive_key(c.seed, r, method_key(Method::cbp), c.blocks[bi]));
        return *cbp;
      };
      for (std::size_t mi = 0; mi < nm; ++mi) {
        std::vector<double> draws;
        switch (c.methods[mi]) {
          case Method::mpb:
            draws = mpb_set(fb).draws;
            break;
          case Method::cbp:
            draws = cbp_set().draws;
            break;
          case Method::hpb:
            if (c.statistic == StatisticKind::mean)
              draws = fb.hybrid_from_draws(mpb_set(fb), cbp_set()).draws.draws;
            else
              draws = fb.hybrid_draws(c.statistic, derive_key(c.seed, r, method_key(Method::hpb), c.blocks[bi]))
                        .draws.draws;
            break;
        }
        out.d1[mi][bi][r] = d1_distance(DistributionSample(std::move(draws)), out.reference);
      }
    }
  }

  for (std::size_t mi = 0; mi < nm; ++mi)
    for (std::size_t bi = 0; bi < nb; ++bi) {
      const auto& v = out.d1[mi][bi];
      out.rows.push_back({ c.model.model, c.methods[mi], c.n, c.blocks[bi], mean_of(v),
                           batch_standard_error(v, c.batches) });
    }
  return out;
}

std::vector<StdRow> run_std_experiment(const ExperimentConfig& c)
{
  c.validate();
  if (c.statistic != StatisticKind::ratio)
    throw std::invalid_argument("run_std_experiment: statistic must be ratio");
  const double est_ex = reference_distribution(c).sd();
  const std::size_t nb = c.blocks.size();
  std::vector<double> mc(c.replications * nb);
  std::vector<double> closed(c.replications * nb);

  const auto reps = static_cast<std::ptrdiff_t>(c.replications);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t rr = 0; rr < reps; ++rr) {
    const auto r = static_cast<std::uint64_t>(rr);
    Engine rng = make_stream(c.seed, stream_tag::series, r);
    const SeriesSample x = simulate_model(c.model, c.n, rng);
    const SpectralEstimate fhat = experiment_estimate(c, x);
    for (std::size_t bi = 0; bi < nb; ++bi) {
      BootstrapOptions opt;
      opt.replicates = c.bootstrap_reps;
      opt.block_length = c.blocks[bi];
      const FrequencyBootstrap fb(x, fhat, c.phi, opt);
      const auto draws = fb.cbp_draws(StatisticKind::ratio, derive_key(c.seed, r, method_key(Method::cbp), c.blocks[bi]));
      mc[r * nb + bi] = std::sqrt(draws.variance());
      closed[r * nb + bi] = std::sqrt(fb.cbp_variance_closed_form(StatisticKind::ratio).var_star);
    }
  }

  std::vector<StdRow> rows;
  for (std::size_t bi = 0; bi < nb; ++bi) {
    std::vector<double> a(c.replications), s(c.replications);
    for (std::size_t r = 0; r < c.replications; ++r) {
      a[r] = mc[r * nb + bi];
      s[r] = closed[r * nb + bi];
    }
    rows.push_back({ c.model.model, c.n, est_ex, c.blocks[bi], mean_of(a), sd_of(a), mean_of(s), sd_of(s) });
  }
  return rows;
}

// ---------------------------------------------------------------- presets

Scale parse_scale(const std::string& s)
{
  if (s == "desk")
    return Scale::desk;
  if (s == "full")
    return Scale::full;
  throw std::invalid_argument("unknown scale '" + s + "' (desk|full)");
}

std::vector<ExperimentConfig> preset(const std::string& name, Scale scale)
{
  const bool desk = scale == Scale::desk;
  std::vector<ExperimentConfig> out;
  if (name == "figure1" || name == "figure2") {
    const std::vector<ModelId> models = name == "figure1" ? std::vector{ ModelId::I, ModelId::II }
                                                          : std::vector{ ModelId::III, ModelId::IV };
    for (auto id : models)
      for (std::size_t n : { 150u, 2000u }) {
        ExperimentConfig c;
        c.model = ModelSpec::defaults(id);
        c.n = n;
        c.statistic = StatisticKind::mean;
        c.phi = PhiFunction::cos_lag(1);
        c.parzen_lag = n == 150 ? 15 : 25;
        if (n == 150)
          c.blocks = desk ? parse_block_list("6:30:4") : parse_block_list("4:40:2");
        else
          c.blocks = desk ? parse_block_list("10,20,30,40,60,80,100") : parse_block_list("10:150:10");
        c.bootstrap_reps = 1000;
        c.replications = desk ? 40 : 200;
        c.reference_reps = 10000;
        out.push_back(c);
      }
    return out;
  }
  if (name == "table1") {
    for (auto id : { ModelId::I, ModelId::II, ModelId::III, ModelId::IV })
      for (std::size_t n : { 150u, 300u, 500u }) {
        ExperimentConfig c;
        c.model = ModelSpec::defaults(id);
        c.n = n;
        c.statistic = StatisticKind::ratio;
        c.phi = PhiFunction::cos_lag(1);
        c.methods = { Method::cbp };
        c.parzen_lag = n == 150 ? 15 : n == 300 ? 20 : 25;
        c.blocks = n == 150 ? std::vector<std::size_t>{ 18, 20, 22 }
                 : n == 300 ? std::vector<std::size_t>{ 20, 22, 24 }
                            : std::vector<std::size_t>{ 20, 25, 30 };
        c.bootstrap_reps = 500;
        c.replications = desk ? 100 : 500;
        c.reference_reps = desk ? 20000 : 50000;
        out.push_back(c);
      }
    return out;
  }
  throw std::invalid_argument("unknown preset '" + name + "' (figure1|figure2|table1)");
}

void write_distribution_csv(std::ostream& os, std::span<const DistributionRow> rows, bool header)
{
  if (header)
    os << "model,method,n,b,mean_d1,se_d1\n";
  os << std::setprecision(10);
  for (const auto& r : rows)
    os << to_string(r.model) << ',' << to_string(r.method) << ',' << r.n << ',' << r.b << ',' << r.mean_d1 << ','
       << r.se_d1 << '\n';
}

void write_std_csv(std::ostream& os, std::span<const StdRow> rows, bool header)
{
  if (header)
    os << "model,n,est_ex,b,mean,std,mean_closed,std_closed\n";
  os << std::setprecision(10);
  for (const auto& r : rows)
    os << to_string(r.model) << ',' << r.n << ',' << r.est_ex << ',' << r.b << ',' << r.mean << ',' << r.std << ','
       << r.mean_closed << ',' << r.std_closed << '\n';
}

} // namespace fdb
