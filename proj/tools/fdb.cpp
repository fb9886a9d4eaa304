// fdb: command-line front end to the fdboot library. All tables go to CSV.

#include "fdb/bootstrap.hpp"
#include "fdb/dgp.hpp"
#include "fdb/harness.hpp"
#include "fdb/rng.hpp"
#include "fdb/spectral.hpp"
#include "fdb/stats.hpp"
#include "fdb/tuning.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fdb;

namespace {

constexpr double two_pi = 6.283185307179586;

std::vector<std::string> split_row(const std::string& line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  return out;
}

bool parse_double(const std::string& s, double& v)
{
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    return used > 0;
  } catch (const std::exception&) {
    return false;
  }
}

// Rows of numeric cells; a leading non-numeric line is taken as a header.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::vector<std::string>* header = nullptr)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    const auto cells = split_row(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      double v;
      if (!parse_double(c, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        if (header)
          *header = cells;
        first = false;
        continue;
      }
      throw std::runtime_error(path + ": non-numeric row '" + line + "'");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

SeriesSample read_series(const std::string& path)
{
  std::vector<double> v;
  for (const auto& row : read_numeric_csv(path))
    v.push_back(row.at(0));
  if (v.size() < 4)
    throw std::runtime_error(path + ": need at least 4 observations");
  return SeriesSample(std::move(v));
}

// Reads "j,frequency,value" rows as written by `spectrum --method periodogram`.
Periodogram read_periodogram(const std::string& path)
{
  std::vector<std::string> header;
  const auto rows = read_numeric_csv(path, &header);
  if (rows.empty() || rows[0].size() < 3)
    throw std::runtime_error(path + ": expected columns j,frequency,value");
  std::size_t m = 0;
  for (const auto& r : rows)
    if (r[0] != 0.0 && r[1] != 0.0) {
      m = static_cast<std::size_t>(std::lround(two_pi * r[0] / r[1]));
      break;
    }
  if (m < 2)
    throw std::runtime_error(path + ": cannot infer the grid order");
  FourierGrid grid(m);
  if (rows.size() != grid.size())
    throw std::runtime_error(path + ": row count does not match G(" + std::to_string(m) + ")");
  Periodogram pg{ grid, std::vector<double>(grid.size(), 0.0) };
  for (const auto& r : rows)
    pg.values[grid.position(static_cast<int>(std::lround(r[0])))] = r[2];
  return pg;
}

std::size_t default_lag(std::size_t n)
{
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(2.0 * std::cbrt(static_cast<double>(n)))));
}

SpectralEstimate make_estimate(const std::string& method, double param, const SeriesSample& x)
{
  if (method == "parzen")
    return parzen_lag_window(x, param > 0.0 ? static_cast<std::size_t>(param) : default_lag(x.size()));
  if (method == "kernel") {
    if (!(param > 0.0))
      throw std::invalid_argument("kernel estimate needs --param h > 0");
    return kernel_smoothed_estimate(x, param);
  }
  if (method == "welch") {
    const std::size_t b =
        param > 0.0 ? static_cast<std::size_t>(param) : static_cast<std::size_t>(std::lround(std::sqrt(x.size())));
    return averaged_subsample_estimate(x, b);
  }
  throw std::invalid_argument("unknown estimator '" + method + "'");
}

std::ostream& open_out(const std::string& path, std::ofstream& file)
{
  if (path.empty() || path == "-")
    return std::cout;
  file.open(path);
  if (!file)
    throw std::runtime_error("cannot write " + path);
  file << std::setprecision(12);
  return file;
}

struct ModelArgs
{
  std::string model = "I";
  std::size_t n = 150;
  std::uint64_t seed = 1;
  std::optional<double> theta, phi, a0, a1;
  std::optional<std::string> innovation;
  std::optional<std::size_t> burn_in;

  ModelSpec spec() const
  {
    ModelSpec s = ModelSpec::defaults(parse_model(model));
    if (theta)
      s.theta = *theta;
    if (phi)
      s.phi = *phi;
    if (a0)
      s.a0 = *a0;
    if (a1)
      s.a1 = *a1;
    if (burn_in)
      s.burn_in = *burn_in;
    if (innovation) {
      if (*innovation == "normal" || *innovation == "gaussian")
        s.innovation = Innovation::standard_normal;
      else if (*innovation == "exponential" || *innovation == "exp")
        s.innovation = Innovation::centered_exponential;
      else
        throw std::invalid_argument("unknown innovation '" + *innovation + "'");
    }
    s.validate();
    return s;
  }
};

void add_model_options(CLI::App* app, ModelArgs& m, bool with_seed = true)
{
  app->add_option("--model", m.model, "I, II, III or IV")->capture_default_str();
  app->add_option("--n", m.n, "series length")->capture_default_str();
  if (with_seed)
    app->add_option("--seed", m.seed)->capture_default_str();
  app->add_option("--theta", m.theta, "MA(1) coefficient");
  app->add_option("--phi-ar", m.phi, "Model IV coefficient");
  app->add_option("--a0", m.a0);
  app->add_option("--a1", m.a1);
  app->add_option("--innovation", m.innovation, "normal or exponential");
  app->add_option("--burn-in", m.burn_in);
}

// Series from --input, or simulated from the model options.
SeriesSample obtain_series(const std::string& input, const ModelArgs& m)
{
  if (!input.empty())
    return read_series(input);
  Engine rng = make_stream(m.seed, stream_tag::series);
  return simulate_model(m.spec(), m.n, rng);
}

void write_report(std::ostream& os, const std::map<std::string, double>& kv)
{
  os << "key,value\n";
  for (const auto& [k, v] : kv)
    os << k << ',' << v << '\n';
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Frequency-domain bootstrap for spectral means and ratio statistics" };
  app.require_subcommand(1);
  std::cout << std::setprecision(12);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate one of the four models");
  ModelArgs sim_m;
  std::string sim_out;
  add_model_options(sim, sim_m);
  sim->add_option("--out", sim_out, "output CSV (default stdout)");
  sim->callback([&] {
    Engine rng = make_stream(sim_m.seed, stream_tag::series);
    const auto x = simulate_model(sim_m.spec(), sim_m.n, rng);
    std::ofstream f;
    auto& os = open_out(sim_out, f);
    os << "x\n";
    for (double v : x.values)
      os << v << '\n';
  });

  // spectrum
  auto* spec = app.add_subcommand("spectrum", "spectral estimate or periodogram on a Fourier grid");
  std::string spec_method = "parzen", spec_input, spec_out;
  double spec_param = 0.0;
  std::size_t spec_grid = 0;
  ModelArgs spec_m;
  spec->add_option("--method", spec_method, "welch, parzen, kernel or periodogram")->capture_default_str();
  spec->add_option("--param", spec_param, "welch block length, parzen lag or kernel bandwidth");
  spec->add_option("--grid", spec_grid, "grid order m (default n)");
  spec->add_option("--input", spec_input, "series CSV (one value per line)");
  spec->add_option("--out", spec_out);
  add_model_options(spec, spec_m);
  spec->callback([&] {
    const auto x = obtain_series(spec_input, spec_m);
    std::ofstream f;
    auto& os = open_out(spec_out, f);
    if (spec_method == "periodogram") {
      const auto pg = spec_grid == 0 ? periodogram(x) : periodogram(x, FourierGrid(spec_grid));
      os << "j,frequency,value\n";
      for (std::size_t p = 0; p < pg.grid.size(); ++p)
        os << pg.grid.index(p) << ',' << pg.grid.frequency(p) << ',' << pg.values[p] << '\n';
      return;
    }
    const auto est = make_estimate(spec_method, spec_param, x);
    const FourierGrid grid(spec_grid == 0 ? x.size() : spec_grid);
    const auto values = est.evaluate(grid);
    os << "j,frequency,value\n";
    for (std::size_t p = 0; p < grid.size(); ++p)
      os << grid.index(p) << ',' << grid.frequency(p) << ',' << values[p] << '\n';
  });

  // stat
  auto* stat = app.add_subcommand("stat", "spectral mean and ratio statistic from a periodogram");
  std::string stat_phi = "cos:1", stat_input, stat_series;
  stat->add_option("--phi", stat_phi, "cos:h, indicator:x or one")->capture_default_str();
  stat->add_option("--input", stat_input, "periodogram CSV (j,frequency,value)");
  stat->add_option("--series", stat_series, "series CSV; also reports the integral forms");
  stat->callback([&] {
    if (stat_input.empty() == stat_series.empty())
      throw CLI::ValidationError("stat", "give exactly one of --input or --series");
    const auto phi = PhiFunction::parse(stat_phi);
    std::optional<SeriesSample> x;
    Periodogram pg = stat_input.empty() ? (x = read_series(stat_series), periodogram(*x)) : read_periodogram(stat_input);
    std::map<std::string, double> kv;
    kv["order"] = static_cast<double>(pg.grid.order());
    kv["mean"] = spectral_mean(phi, pg).value;
    kv["ratio"] = ratio_statistic(phi, pg).value;
    if (x) {
      kv["integral_mean"] = integrated_spectral_mean(phi, *x);
      kv["integral_ratio"] = integrated_ratio_statistic(phi, *x);
    }
    write_report(std::cout, kv);
  });

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "MPB, CBP or hybrid bootstrap of one series");
  std::string boot_method = "cbp", boot_stat = "mean", boot_phi = "cos:1", boot_input, boot_draws, boot_est = "parzen";
  double boot_param = 0.0;
  std::size_t boot_b = 0, boot_M = 1000;
  std::uint64_t boot_seed = 1;
  std::optional<double> boot_alpha;
  std::string boot_scheme = "exponential";
  ModelArgs boot_m;
  boot->add_option("--method", boot_method, "mpb, cbp or hybrid")->capture_default_str();
  boot->add_option("--stat", boot_stat, "mean or ratio")->capture_default_str();
  boot->add_option("--phi", boot_phi)->capture_default_str();
  boot->add_option("--b", boot_b, "block length (default round(2 n^(1/3)))");
  boot->add_option("--M", boot_M, "bootstrap replicates")->capture_default_str();
  boot->add_option("--seed", boot_seed)->capture_default_str();
  boot->add_option("--ci", boot_alpha, "alpha for the 1 - 2 alpha CBP interval");
  boot->add_option("--estimator", boot_est, "parzen, kernel or welch")->capture_default_str();
  boot->add_option("--param", boot_param, "estimator tuning value");
  boot->add_option("--scheme", boot_scheme, "MPB innovations: exponential or empirical")->capture_default_str();
  boot->add_option("--input", boot_input, "series CSV (default: simulate)");
  boot->add_option("--draws", boot_draws, "write the draws to this CSV");
  add_model_options(boot, boot_m, false);
  boot->callback([&] {
    boot_m.seed = boot_seed;
    const auto x = obtain_series(boot_input, boot_m);
    const auto kind = parse_statistic_kind(boot_stat);
    BootstrapOptions o;
    o.block_length = boot_b == 0 ? default_lag(x.size()) : boot_b;
    o.replicates = boot_M;
    o.seed = boot_seed;
    if (boot_scheme == "empirical")
      o.mpb_scheme = MpbScheme::empirical;
    else if (boot_scheme != "exponential")
      throw std::invalid_argument("unknown scheme '" + boot_scheme + "'");
    const FrequencyBootstrap fb(x, make_estimate(boot_est, boot_param, x), PhiFunction::parse(boot_phi), o);

    std::map<std::string, double> kv;
    kv["n"] = static_cast<double>(x.size());
    kv["b"] = static_cast<double>(fb.block_length());
    kv["M"] = static_cast<double>(boot_M);
    kv["estimate"] = fb.point_estimate(kind);
    DrawSet draws;
    if (boot_method == "mpb") {
      draws = fb.mpb_draws(kind);
    } else if (boot_method == "cbp") {
      draws = fb.cbp_draws(kind);
      const auto cf = fb.cbp_variance_closed_form(kind);
      kv["var_closed_form"] = cf.var_star;
      kv["c_n"] = cf.correction;
    } else if (boot_method == "hybrid" || boot_method == "hpb") {
      const auto h = fb.hybrid_draws(kind);
      draws = h.draws;
      kv["rescale"] = h.rescale;
      kv["first"] = h.report.first;
      kv["combined"] = h.report.combined;
      kv["c_n"] = h.report.correction;
      kv["total"] = h.report.total;
    } else {
      throw std::invalid_argument("unknown method '" + boot_method + "'");
    }
    kv["draw_mean"] = draws.mean();
    kv["draw_variance"] = draws.variance();
    kv["center"] = draws.center;
    if (boot_alpha) {
      const auto ci = fb.confidence_interval(kind, *boot_alpha);
      kv["ci_lower"] = ci.lower;
      kv["ci_upper"] = ci.upper;
      kv["ci_level"] = ci.level;
      kv["ci_studentizer"] = ci.studentizer;
    }
    write_report(std::cout, kv);
    if (!boot_draws.empty()) {
      std::ofstream f;
      auto& os = open_out(boot_draws, f);
      os << "replicate,draw\n";
      for (std::size_t i = 0; i < draws.draws.size(); ++i)
        os << i << ',' << draws.draws[i] << '\n';
    }
  });

  // select-b
  auto* sel = app.add_subcommand("select-b", "AR-sieve block length selection");
  std::string sel_phi = "cos:1", sel_grid, sel_input;
  std::size_t sel_L = 200;
  std::uint64_t sel_seed = 1;
  std::optional<std::size_t> sel_order;
  ModelArgs sel_m;
  sel->add_option("--phi", sel_phi)->capture_default_str();
  sel->add_option("--grid", sel_grid, "bmin:bmax:step or b1,b2,... (default from n)");
  sel->add_option("--L", sel_L, "pseudo-series")->capture_default_str();
  sel->add_option("--seed", sel_seed)->capture_default_str();
  sel->add_option("--max-order", sel_order, "largest AR order for AIC");
  sel->add_option("--input", sel_input, "series CSV (default: simulate)");
  add_model_options(sel, sel_m, false);
  sel->callback([&] {
    sel_m.seed = sel_seed;
    const auto x = obtain_series(sel_input, sel_m);
    const auto blocks = sel_grid.empty() ? default_block_grid(x.size()) : parse_block_list(sel_grid);
    const auto r = select_block_length(x, PhiFunction::parse(sel_phi), blocks, sel_L, sel_seed, sel_order);
    std::cout << "b,mse,mean_tau2,selected\n";
    for (std::size_t i = 0; i < r.blocks.size(); ++i)
      std::cout << r.blocks[i] << ',' << r.mse[i] << ',' << r.mean_tau2[i] << ',' << (r.blocks[i] == r.selected)
                << '\n';
    std::cerr << "b* = " << r.selected << ", AR order " << r.fit.order << ", target tau2 " << r.target << '\n';
  });

  // cv-bandwidth
  auto* cv = app.add_subcommand("cv-bandwidth", "cross-validated kernel bandwidth");
  std::string cv_grid, cv_input;
  ModelArgs cv_m;
  cv->add_option("--grid", cv_grid, "h1,h2,... or lo:hi:count (log-spaced)")->required();
  cv->add_option("--input", cv_input, "series CSV (default: simulate)");
  add_model_options(cv, cv_m);
  cv->callback([&] {
    const auto x = obtain_series(cv_input, cv_m);
    std::vector<double> h;
    if (std::count(cv_grid.begin(), cv_grid.end(), ':') == 2) {
      std::string g = cv_grid;
      std::replace(g.begin(), g.end(), ':', ',');
      const auto parts = split_row(g);
      h = log_spaced(std::stod(parts[0]), std::stod(parts[1]), std::stoul(parts[2]));
    } else {
      for (const auto& c : split_row(cv_grid))
        h.push_back(std::stod(c));
    }
    const auto r = cv_bandwidth(x, h);
    std::cout << "h,cv,selected\n";
    for (std::size_t i = 0; i < r.bandwidths.size(); ++i)
      std::cout << r.bandwidths[i] << ',' << r.scores[i] << ',' << (i == r.selected_index) << '\n';
  });

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte-Carlo distance curves and standard-deviation tables");
  std::string exp_preset, exp_scale = "desk", exp_config, exp_out = ".", exp_kind = "distribution";
  exp->add_option("--preset", exp_preset, "figure1, figure2 or table1");
  exp->add_option("--scale", exp_scale, "desk or full")->capture_default_str();
  exp->add_option("--config", exp_config, "key = value configuration file");
  exp->add_option("--kind", exp_kind, "for --config: distribution or std")->capture_default_str();
  exp->add_option("--out", exp_out, "output directory")->capture_default_str();
  exp->callback([&] {
    if (exp_preset.empty() == exp_config.empty())
      throw CLI::ValidationError("experiment", "give exactly one of --preset or --config");
    std::filesystem::create_directories(exp_out);
    std::vector<ExperimentConfig> configs;
    bool std_table = exp_kind == "std";
    std::string name;
    if (!exp_preset.empty()) {
      configs = preset(exp_preset, parse_scale(exp_scale));
      std_table = exp_preset == "table1";
      name = exp_preset;
    } else {
      configs.push_back(load_config(exp_config));
      name = std::filesystem::path(exp_config).stem().string();
    }
    const auto path = std::filesystem::path(exp_out) / (name + ".csv");
    std::ofstream os(path);
    if (!os)
      throw std::runtime_error("cannot write " + path.string());
    bool header = true;
    for (const auto& c : configs) {
      std::cerr << "model " << to_string(c.model.model) << ", n = " << c.n << " ..." << std::endl;
      if (std_table) {
        const auto rows = run_std_experiment(c);
        write_std_csv(os, rows, header);
      } else {
        const auto res = run_distribution_experiment(c);
        write_distribution_csv(os, res.rows, header);
      }
      header = false;
      os.flush();
    }
    std::cerr << "wrote " << path.string() << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
