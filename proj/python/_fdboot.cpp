#include "fdb/bootstrap.hpp"
#include "fdb/dgp.hpp"
#include "fdb/harness.hpp"
#include "fdb/rng.hpp"
#include "fdb/spectral.hpp"
#include "fdb/stats.hpp"
#include "fdb/tuning.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace fdb;

namespace {

py::array_t<double> to_array(const std::vector<double>& v)
{
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

SeriesSample series(const std::vector<double>& x)
{
  if (x.size() < 4)
    throw std::invalid_argument("series needs at least 4 observations");
  return SeriesSample(x);
}

SpectralEstimate estimate(const SeriesSample& x, const std::string& method, double param)
{
  const double n = static_cast<double>(x.size());
  if (method == "parzen")
    return parzen_lag_window(x, param > 0.0 ? static_cast<std::size_t>(param)
                                            : std::max<std::size_t>(2, std::lround(2.0 * std::cbrt(n))));
  if (method == "kernel")
    return kernel_smoothed_estimate(x, param);
  if (method == "welch")
    return averaged_subsample_estimate(x, param > 0.0 ? static_cast<std::size_t>(param)
                                                      : static_cast<std::size_t>(std::lround(std::sqrt(n))));
  throw std::invalid_argument("unknown estimator '" + method + "'");
}

py::dict report_dict(const VarianceReport& r)
{
  py::dict d;
  d["var_star"] = r.var_star;
  d["first"] = r.first;
  d["correction"] = r.correction;
  d["total"] = r.total;
  d["double_sum"] = r.double_sum;
  d["combined"] = r.combined;
  d["method"] = r.method == VarianceMethod::closed_form ? "closed_form" : "monte_carlo";
  return d;
}

// Bootstrap bound to one series, spectral estimate, phi and block length.
class Bootstrap
{
public:
  Bootstrap(const std::vector<double>& x,
            const std::string& phi,
            std::size_t b,
            std::size_t M,
            std::uint64_t seed,
            const std::string& estimator,
            double param,
            const std::string& scheme)
      : x_(series(x)), fb_(make(x_, phi, b, M, seed, estimator, param, scheme))
  {
  }

  double point_estimate(const std::string& stat) const { return fb_.point_estimate(parse_statistic_kind(stat)); }
  py::array_t<double> mpb(const std::string& stat) const { return to_array(fb_.mpb_draws(parse_statistic_kind(stat)).draws); }
  py::array_t<double> cbp(const std::string& stat) const { return to_array(fb_.cbp_draws(parse_statistic_kind(stat)).draws); }

  py::dict hybrid(const std::string& stat) const
  {
    const auto h = fb_.hybrid_draws(parse_statistic_kind(stat));
    py::dict d = report_dict(h.report);
    d["draws"] = to_array(h.draws.draws);
    d["rescale"] = h.rescale;
    return d;
  }

  py::dict cbp_closed(const std::string& stat) const
  {
    return report_dict(fb_.cbp_variance_closed_form(parse_statistic_kind(stat)));
  }
  py::dict hybrid_closed(const std::string& stat) const
  {
    return report_dict(fb_.hybrid_variance_closed_form(parse_statistic_kind(stat)));
  }
  double cn(const std::string& stat) const { return fb_.cn_correction(parse_statistic_kind(stat)); }

  py::dict ci(const std::string& stat, double alpha) const
  {
    const auto c = fb_.confidence_interval(parse_statistic_kind(stat), alpha);
    py::dict d;
    d["lower"] = c.lower;
    d["upper"] = c.upper;
    d["level"] = c.level;
    d["point"] = c.point;
    d["studentizer"] = c.studentizer;
    d["t_lower"] = c.t_lower;
    d["t_upper"] = c.t_upper;
    return d;
  }

  std::size_t n() const { return fb_.length(); }
  std::size_t b() const { return fb_.block_length(); }

private:
  static FrequencyBootstrap make(const SeriesSample& x,
                                 const std::string& phi,
                                 std::size_t b,
                                 std::size_t M,
                                 std::uint64_t seed,
                                 const std::string& estimator,
                                 double param,
                                 const std::string& scheme)
  {
    BootstrapOptions o;
    o.block_length = b;
    o.replicates = M;
    o.seed = seed;
    if (scheme == "empirical")
      o.mpb_scheme = MpbScheme::empirical;
    else if (scheme != "exponential")
      throw std::invalid_argument("unknown scheme '" + scheme + "'");
    return FrequencyBootstrap(x, estimate(x, estimator, param), PhiFunction::parse(phi), o);
  }

  SeriesSample x_;
  FrequencyBootstrap fb_;
};

std::vector<py::dict> distribution_rows(const std::vector<DistributionRow>& rows)
{
  std::vector<py::dict> out;
  for (const auto& r : rows) {
    py::dict d;
    d["model"] = to_string(r.model);
    d["method"] = to_string(r.method);
    d["n"] = r.n;
    d["b"] = r.b;
    d["mean_d1"] = r.mean_d1;
    d["se_d1"] = r.se_d1;
    out.push_back(d);
  }
  return out;
}

std::vector<py::dict> std_rows(const std::vector<StdRow>& rows)
{
  std::vector<py::dict> out;
  for (const auto& r : rows) {
    py::dict d;
    d["model"] = to_string(r.model);
    d["n"] = r.n;
    d["est_ex"] = r.est_ex;
    d["b"] = r.b;
    d["mean"] = r.mean;
    d["std"] = r.std;
    d["mean_closed"] = r.mean_closed;
    d["std_closed"] = r.std_closed;
    out.push_back(d);
  }
  return out;
}

} // namespace

PYBIND11_MODULE(_fdboot, m)
{
  m.doc() = "Frequency-domain bootstrap for spectral means and ratio statistics";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p)
        std::rethrow_exception(p);
    } catch (const std::domain_error& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });

  m.def(
      "simulate",
      [](const std::string& model, std::size_t n, std::uint64_t seed, std::optional<std::string> innovation,
         std::optional<double> theta, std::optional<std::size_t> burn_in) {
        ModelSpec s = ModelSpec::defaults(parse_model(model));
        if (innovation) {
          if (*innovation == "normal" || *innovation == "gaussian")
            s.innovation = Innovation::standard_normal;
          else if (*innovation == "exponential" || *innovation == "exp")
            s.innovation = Innovation::centered_exponential;
          else
            throw std::invalid_argument("unknown innovation '" + *innovation + "'");
        }
        if (theta)
          s.theta = *theta;
        if (burn_in)
          s.burn_in = *burn_in;
        s.validate();
        Engine rng = make_stream(seed, stream_tag::series);
        return to_array(simulate_model(s, n, rng).values);
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 1, py::arg("innovation") = py::none(),
      py::arg("theta") = py::none(), py::arg("burn_in") = py::none(),
      "Simulate n values of model I, II, III or IV.");

  m.def(
      "periodogram",
      [](const std::vector<double>& x, std::optional<std::size_t> order) {
        const auto s = series(x);
        const auto pg = order ? periodogram(s, FourierGrid(*order)) : periodogram(s);
        return py::make_tuple(to_array(pg.grid.frequencies()), to_array(pg.values));
      },
      py::arg("x"), py::arg("order") = py::none(), "(frequencies, values) on G(order), default G(n).");

  m.def(
      "spectral_estimate",
      [](const std::vector<double>& x, const std::string& method, double param, std::optional<std::size_t> order) {
        const auto s = series(x);
        const FourierGrid g(order.value_or(s.size()));
        return py::make_tuple(to_array(g.frequencies()), to_array(estimate(s, method, param).evaluate(g)));
      },
      py::arg("x"), py::arg("method") = "parzen", py::arg("param") = 0.0, py::arg("order") = py::none(),
      "parzen (lag), kernel (bandwidth) or welch (block length) on a Fourier grid.");

  m.def(
      "spectral_mean",
      [](const std::vector<double>& x, const std::string& phi) {
        return spectral_mean(PhiFunction::parse(phi), periodogram(series(x))).value;
      },
      py::arg("x"), py::arg("phi") = "cos:1");
  m.def(
      "ratio_statistic",
      [](const std::vector<double>& x, const std::string& phi) {
        return ratio_statistic(PhiFunction::parse(phi), periodogram(series(x))).value;
      },
      py::arg("x"), py::arg("phi") = "cos:1");
  m.def(
      "integrated_spectral_mean",
      [](const std::vector<double>& x, const std::string& phi) {
        return integrated_spectral_mean(PhiFunction::parse(phi), series(x));
      },
      py::arg("x"), py::arg("phi") = "cos:1");
  m.def(
      "integrated_ratio_statistic",
      [](const std::vector<double>& x, const std::string& phi) {
        return integrated_ratio_statistic(PhiFunction::parse(phi), series(x));
      },
      py::arg("x"), py::arg("phi") = "cos:1");

  py::class_<Bootstrap>(m, "Bootstrap")
      .def(py::init<const std::vector<double>&, const std::string&, std::size_t, std::size_t, std::uint64_t,
                    const std::string&, double, const std::string&>(),
           py::arg("x"), py::arg("phi") = "cos:1", py::arg("b"), py::arg("M") = 1000, py::arg("seed") = 0,
           py::arg("estimator") = "parzen", py::arg("param") = 0.0, py::arg("scheme") = "exponential")
      .def_property_readonly("n", &Bootstrap::n)
      .def_property_readonly("b", &Bootstrap::b)
      .def("point_estimate", &Bootstrap::point_estimate, py::arg("stat") = "mean")
      .def("mpb_draws", &Bootstrap::mpb, py::arg("stat") = "mean")
      .def("cbp_draws", &Bootstrap::cbp, py::arg("stat") = "mean")
      .def("hybrid_draws", &Bootstrap::hybrid, py::arg("stat") = "mean")
      .def("cbp_variance", &Bootstrap::cbp_closed, py::arg("stat") = "mean")
      .def("hybrid_variance", &Bootstrap::hybrid_closed, py::arg("stat") = "mean")
      .def("cn_correction", &Bootstrap::cn, py::arg("stat") = "mean")
      .def("confidence_interval", &Bootstrap::ci, py::arg("stat") = "mean", py::arg("alpha") = 0.025);

  m.def(
      "cv_bandwidth",
      [](const std::vector<double>& x, const std::vector<double>& h) {
        const auto r = cv_bandwidth(series(x), h);
        py::dict d;
        d["bandwidths"] = to_array(r.bandwidths);
        d["scores"] = to_array(r.scores);
        d["selected"] = r.selected;
        return d;
      },
      py::arg("x"), py::arg("bandwidths"));

  m.def(
      "fit_ar",
      [](const std::vector<double>& x, std::optional<std::size_t> max_order) {
        const auto f = fit_ar(series(x), max_order);
        py::dict d;
        d["order"] = f.order;
        d["coefficients"] = to_array(f.coefficients);
        d["sigma2"] = f.sigma2;
        d["eta"] = f.eta;
        d["aic"] = to_array(f.aic);
        return d;
      },
      py::arg("x"), py::arg("max_order") = py::none());

  m.def(
      "select_block_length",
      [](const std::vector<double>& x, const std::string& phi, std::optional<std::vector<std::size_t>> blocks,
         std::size_t L, std::uint64_t seed) {
        const auto s = series(x);
        const auto grid = blocks.value_or(default_block_grid(s.size()));
        const auto r = select_block_length(s, PhiFunction::parse(phi), grid, L, seed);
        py::dict d;
        d["blocks"] = r.blocks;
        d["mse"] = to_array(r.mse);
        d["mean_tau2"] = to_array(r.mean_tau2);
        d["selected"] = r.selected;
        d["target"] = r.target;
        d["ar_order"] = r.fit.order;
        return d;
      },
      py::arg("x"), py::arg("phi") = "cos:1", py::arg("blocks") = py::none(), py::arg("L") = 200,
      py::arg("seed") = 1);

  m.def(
      "d1_distance",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return d1_distance(DistributionSample(a), DistributionSample(b));
      },
      py::arg("a"), py::arg("b"), "Wasserstein-1 distance of two empirical distributions.");

  m.def(
      "run_experiment",
      [](const std::string& config, const std::string& kind) {
        const auto c = parse_config(config);
        if (kind == "std")
          return std_rows(run_std_experiment(c));
        if (kind != "distribution")
          throw std::invalid_argument("kind must be 'distribution' or 'std'");
        return distribution_rows(run_distribution_experiment(c).rows);
      },
      py::arg("config"), py::arg("kind") = "distribution",
      "Run one experiment from key = value configuration text; returns a list of row dicts.");

  m.def(
      "preset_configs",
      [](const std::string& name, const std::string& scale) {
        std::vector<py::dict> out;
        for (const auto& c : preset(name, parse_scale(scale))) {
          py::dict d;
          d["model"] = to_string(c.model.model);
          d["n"] = c.n;
          d["blocks"] = c.blocks;
          d["M"] = c.bootstrap_reps;
          d["R"] = c.replications;
          d["lag"] = c.parzen_lag;
          d["statistic"] = to_string(c.statistic);
          out.push_back(d);
        }
        return out;
      },
      py::arg("name"), py::arg("scale") = "desk");
}
