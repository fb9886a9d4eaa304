#include "doctest.h"
#include "oracles.hpp"

#include "fdb/bootstrap.hpp"
#include "fdb/dgp.hpp"
#include "fdb/rng.hpp"

#include <omp.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace fdb;

namespace {

SeriesSample simulate(ModelId id, std::size_t n, std::uint64_t seed, Innovation inn)
{
  ModelSpec s = ModelSpec::defaults(id);
  s.innovation = inn;
  Engine rng = make_stream(seed, 0x66);
  return simulate_model(s, n, rng);
}

SeriesSample model_one(std::size_t n, std::uint64_t seed)
{
  return simulate(ModelId::I, n, seed, Innovation::centered_exponential);
}

BootstrapOptions opts(std::size_t b, std::size_t M, std::uint64_t seed = 1)
{
  BootstrapOptions o;
  o.block_length = b;
  o.replicates = M;
  o.seed = seed;
  return o;
}

// Standard error of a sample variance estimate from M draws.
double variance_se(const std::vector<double>& d)
{
  const double m = oracle::mean(d);
  double m2 = 0.0, m4 = 0.0;
  for (double x : d) {
    const double c = (x - m) * (x - m);
    m2 += c;
    m4 += c * c;
  }
  m2 /= static_cast<double>(d.size());
  m4 /= static_cast<double>(d.size());
  return std::sqrt((m4 - m2 * m2) / static_cast<double>(d.size()));
}

} // namespace

TEST_SUITE("bootstrap")
{
  TEST_CASE("options and diagnostics")
  {
    const auto x = model_one(100, 1);
    const auto f = parzen_lag_window(x, 10);
    CHECK_THROWS_AS(FrequencyBootstrap(x, f, PhiFunction::cos_lag(1), opts(1, 10)), std::invalid_argument);
    CHECK_THROWS_AS(FrequencyBootstrap(x, f, PhiFunction::cos_lag(1), opts(101, 10)), std::invalid_argument);
    CHECK_THROWS_AS(FrequencyBootstrap(x, f, PhiFunction::cos_lag(1), opts(10, 1)), std::invalid_argument);
    const FrequencyBootstrap fb(x, f, PhiFunction::cos_lag(1), opts(12, 10));
    CHECK(fb.blocks() == 8);
    CHECK(fb.subsamples() == 89);
    const auto d = fb.diagnostics();
    CHECK(d.b_cubed_over_n == doctest::Approx(1728.0 / 100.0));
    CHECK(d.log_count_over_b == doctest::Approx(std::log(89.0) / 12.0));
  }

  TEST_CASE("degenerate spectral estimate is rejected")
  {
    const auto x = model_one(64, 2);
    const auto zero = external_estimate([](double) { return 0.0; });
    CHECK_THROWS_AS(FrequencyBootstrap(x, zero, PhiFunction::cos_lag(1), opts(8, 10)), std::domain_error);
  }

  TEST_CASE("double sum and c_n against quadruple-loop oracles")
  {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const std::size_t n = 20 + 5 * seed;
      const std::size_t b = 3 + seed % 5;
      const auto x = model_one(n, 10 + seed);
      const auto f = parzen_lag_window(x, 4);
      for (const auto& phi : { PhiFunction::cos_lag(1), PhiFunction::indicator(1.0) }) {
        const FrequencyBootstrap fb(x, f, phi, opts(b, 10));
        const auto& U = fb.residuals();
        std::vector<std::vector<double>> rows(U.rows);
        for (std::size_t t = 0; t < U.rows; ++t)
          rows[t].assign(U.row(t).begin(), U.row(t).end());
        const auto idx = oracle::grid_indices(b);
        std::vector<double> a, fv;
        for (int j : idx) {
          const double l = 2.0 * oracle::pi * j / static_cast<double>(b);
          a.push_back(phi(l));
          fv.push_back(f(l));
        }
        const double full = oracle::subsample_double_sum(rows, idx, a, fv, b, false);
        const double diag = oracle::subsample_double_sum(rows, idx, a, fv, b, true);
        const auto rep = fb.cbp_variance_closed_form(StatisticKind::mean);
        CHECK(std::abs(rep.double_sum - full) < 1e-10);
        CHECK(std::abs(fb.cn_correction(StatisticKind::mean) - diag) < 1e-10);
        const double scale = static_cast<double>(n) / static_cast<double>(b * (n / b));
        CHECK(rep.var_star == doctest::Approx(scale * full).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("zero phi gives zero variance and correction")
  {
    const auto x = model_one(80, 3);
    const FrequencyBootstrap fb(x, parzen_lag_window(x, 8), PhiFunction::cos_lag(1).scaled(0.0), opts(8, 10));
    CHECK(fb.cbp_variance_closed_form(StatisticKind::mean).var_star == 0.0);
    CHECK(fb.cn_correction(StatisticKind::mean) == 0.0);
  }

  TEST_CASE("single subsample b = n")
  {
    const auto x = model_one(60, 4);
    const FrequencyBootstrap fb(x, parzen_lag_window(x, 6), PhiFunction::cos_lag(1), opts(60, 50));
    CHECK(fb.subsamples() == 1);
    const auto d = fb.cbp_draws(StatisticKind::mean);
    for (double v : d.draws)
      CHECK(v == d.draws.front());
    CHECK(std::abs(d.draws.front()) < 1e-12);
    CHECK(std::abs(fb.cbp_variance_closed_form(StatisticKind::mean).var_star) < 1e-20);
    CHECK(std::abs(fb.cn_correction(StatisticKind::mean)) < 1e-20);
  }

  TEST_CASE("bootstrap means are centered")
  {
    const auto x = model_one(400, 5);
    const FrequencyBootstrap fb(x, parzen_lag_window(x, 15), PhiFunction::cos_lag(1), opts(16, 100000));
    for (const auto& d : { fb.mpb_draws(StatisticKind::mean), fb.cbp_draws(StatisticKind::mean) }) {
      const double se = std::sqrt(d.variance() / static_cast<double>(d.draws.size()));
      CHECK(std::abs(d.mean()) < 3.0 * se);
    }
    // CBP center is the Riemann mean of f^ on G(b); MPB center on G(n).
    const auto f = parzen_lag_window(x, 15);
    CHECK(fb.cbp_draws(StatisticKind::mean, 2).center ==
          doctest::Approx(spectral_mean(PhiFunction::cos_lag(1), FourierGrid(16), f.floored(FourierGrid(16))).value));
  }

  TEST_CASE("MPB variance equals its closed form and tau1^2 for white noise")
  {
    const auto x = simulate(ModelId::I, 2000, 6, Innovation::standard_normal);
    SeriesSample wn = x;
    Engine rng = make_stream(6, 1);
    wn.values = generate_innovations(Innovation::standard_normal, 2000, rng);
    const FrequencyBootstrap fb(wn, parzen_lag_window(wn, 25), PhiFunction::cos_lag(1), opts(25, 20000));
    const auto d = fb.mpb_draws(StatisticKind::mean);
    const double exact = fb.hybrid_variance_closed_form(StatisticKind::mean).first;
    CHECK(std::abs(d.variance() - exact) < 3.0 * variance_se(d.draws));

    // Per series the exact Var* carries the sampling error of gamma^(0)^2, sd near 0.08.
    double avg = 0.0;
    const int series = 40;
    for (int k = 0; k < series; ++k) {
      Engine r = make_stream(100 + k, 1);
      SeriesSample w(generate_innovations(Innovation::standard_normal, 2000, r));
      const FrequencyBootstrap g(w, parzen_lag_window(w, 25), PhiFunction::cos_lag(1), opts(25, 10));
      avg += g.hybrid_variance_closed_form(StatisticKind::mean).first / series;
    }
    CHECK(std::abs(avg - 1.0) < 0.05);
  }

  TEST_CASE("empirical MPB scheme resamples the rescaled residuals")
  {
    const auto x = model_one(300, 7);
    auto o = opts(15, 20000);
    o.mpb_scheme = MpbScheme::empirical;
    const FrequencyBootstrap fb(x, parzen_lag_window(x, 15), PhiFunction::cos_lag(1), o);
    CHECK(std::abs(oracle::mean(fb.mpb_residuals().values) - 1.0) < 1e-12);
    const auto d = fb.mpb_draws(StatisticKind::mean);
    const double exact = fb.hybrid_variance_closed_form(StatisticKind::mean).first;
    CHECK(std::abs(d.variance() - exact) < 3.0 * variance_se(d.draws));
  }

  TEST_CASE("CBP closed form matches Monte Carlo")
  {
    const auto x = model_one(250, 8);
    const FrequencyBootstrap fb(x, parzen_lag_window(x, 15), PhiFunction::cos_lag(1), opts(12, 200000));
    const auto d = fb.cbp_draws(StatisticKind::mean);
    const double closed = fb.cbp_variance_closed_form(StatisticKind::mean).var_star;
    CHECK(std::abs(d.variance() - closed) < 3.0 * variance_se(d.draws));
    // Linearized ratio closed form is close, though not exact.
    const auto r = fb.cbp_draws(StatisticKind::ratio);
    const double rc = fb.cbp_variance_closed_form(StatisticKind::ratio).var_star;
    CHECK(r.variance() == doctest::Approx(rc).epsilon(0.1));
  }

  TEST_CASE("scale behaviour in f^")
  {
    const auto x = model_one(200, 9);
    const auto f = parzen_lag_window(x, 12);
    const auto f3 = external_estimate([f](double l) { return 3.0 * f(l); });
    const FrequencyBootstrap a(x, f, PhiFunction::cos_lag(1), opts(10, 200));
    const FrequencyBootstrap b(x, f3, PhiFunction::cos_lag(1), opts(10, 200));
    const auto va = a.mpb_draws(StatisticKind::mean).draws;
    const auto vb = b.mpb_draws(StatisticKind::mean).draws;
    const auto ra = a.cbp_draws(StatisticKind::ratio).draws;
    const auto rb = b.cbp_draws(StatisticKind::ratio).draws;
    const auto ma = a.mpb_draws(StatisticKind::ratio).draws;
    const auto mb = b.mpb_draws(StatisticKind::ratio).draws;
    for (std::size_t i = 0; i < va.size(); ++i) {
      CHECK(vb[i] == doctest::Approx(3.0 * va[i]).epsilon(1e-12));
      CHECK(rb[i] == doctest::Approx(ra[i]).epsilon(1e-10));
      CHECK(mb[i] == doctest::Approx(ma[i]).epsilon(1e-10));
    }
  }

  TEST_CASE("MPB ratio draws are V1 over D*")
  {
    const auto x = model_one(120, 10);
    const auto f = parzen_lag_window(x, 10);
    const FrequencyBootstrap fb(x, f, PhiFunction::cos_lag(1), opts(10, 3));
    const auto& w = fb.weights_full();
    CHECK(std::abs(w.phi_mass - spectral_mean(PhiFunction::cos_lag(1), w.grid, fb.fhat_full()).value) < 1e-14);
    // Reproduce draw 0 from its stream.
    Engine rng = make_stream(1, stream_tag::mpb, 0);
    std::exponential_distribution<double> expo(1.0);
    const FourierGrid& g = w.grid;
    double v1 = 0.0, tstar = 0.0;
    for (std::size_t j = 1; j <= g.half(); ++j) {
      const double u = expo(rng);
      const std::size_t p = g.positive_position(j);
      const double T = fb.fhat_full()[p] * u;
      v1 += (w.values[p] + w.values[g.mirror(p)]) * T;
      tstar += 2.0 * T;
    }
    v1 *= 2.0 * oracle::pi / std::sqrt(120.0);
    const double dstar = 2.0 * oracle::pi / 120.0 * tstar * w.mass;
    CHECK(fb.mpb_draws(StatisticKind::ratio).draws[0] == doctest::Approx(v1 / dstar).epsilon(1e-10));
  }

  TEST_CASE("CBP draw reproduced from its stream")
  {
    const auto x = model_one(90, 11);
    const auto f = parzen_lag_window(x, 8);
    const std::size_t b = 9;
    const FrequencyBootstrap fb(x, f, PhiFunction::cos_lag(2), opts(b, 4, 77));
    Engine rng = make_stream(77, stream_tag::cbp, 2);
    std::uniform_int_distribution<std::size_t> pick(0, fb.subsamples() - 1);
    const FourierGrid g(b);
    std::vector<double> istar(g.size(), 0.0);
    for (std::size_t l = 0; l < fb.blocks(); ++l) {
      const std::size_t t = pick(rng);
      const auto blk = oracle::block_periodogram(x.values, t, b);
      for (std::size_t p = 0; p < g.size(); ++p)
        istar[p] += f(g.frequency(p)) * blk[p] / fb.subsamples_matrix().f_tilde()[p];
    }
    double s = 0.0, num = 0.0, den = 0.0, fnum = 0.0, fden = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      istar[p] /= static_cast<double>(fb.blocks());
      const double l = g.frequency(p);
      s += std::cos(2 * l) * (istar[p] - f(l));
      num += std::cos(2 * l) * istar[p];
      den += istar[p];
      fnum += std::cos(2 * l) * f(l);
      fden += f(l);
    }
    const double L = std::sqrt(90.0) * 2.0 * oracle::pi / static_cast<double>(b) * s;
    const double LR = std::sqrt(90.0) * (num / den - fnum / fden);
    CHECK(fb.cbp_draws(StatisticKind::mean).draws[2] == doctest::Approx(L).epsilon(1e-10));
    CHECK(fb.cbp_draws(StatisticKind::ratio).draws[2] == doctest::Approx(LR).epsilon(1e-10));
  }

  TEST_CASE("hybrid procedure")
  {
    const auto x = model_one(2000, 12);
    const FrequencyBootstrap fb(x, parzen_lag_window(x, 25), PhiFunction::cos_lag(1), opts(25, 4000, 5));
    const auto h = fb.hybrid_draws(StatisticKind::mean);
    const auto again = fb.hybrid_from_draws(fb.mpb_draws(StatisticKind::mean), fb.cbp_draws(StatisticKind::mean));
    CHECK(h.draws.draws == again.draws.draws);
    CHECK(h.report.total == doctest::Approx(h.report.combined - h.report.correction));
    CHECK(h.rescale == doctest::Approx(std::sqrt(h.report.total / h.report.first)));
    const auto oracle_var = linear_asymptotic_variance(LinearModelOracle{ { 1.0, -0.7 }, 1.0, 9.0 },
                                                       PhiFunction::cos_lag(1));
    CHECK(h.draws.variance() == doctest::Approx(oracle_var.tau_sq).epsilon(0.15));
    const auto closed = fb.hybrid_variance_closed_form(StatisticKind::mean);
    CHECK(closed.total == doctest::Approx(h.report.total).epsilon(0.1));

    const auto hr = fb.hybrid_draws(StatisticKind::ratio);
    CHECK(hr.draws.kind == DrawKind::hybrid_ratio);
    CHECK(hr.rescale > 0.0);
    const auto closed_r = fb.hybrid_variance_closed_form(StatisticKind::ratio);
    CHECK(closed_r.correction == doctest::Approx(hr.report.correction));
    // The linear V1 and V3 draws are not exposed; borrow the relative SE of the
    // MPB ratio draw variance.
    const auto v1 = fb.mpb_draws(StatisticKind::ratio);
    const double rel = variance_se(v1.draws) / v1.variance();
    CHECK(std::abs(closed_r.first - hr.report.first) < 3.0 * rel * hr.report.first);
    CHECK(std::abs(closed_r.combined - hr.report.combined) < 3.0 * rel * hr.report.combined);

    const FrequencyBootstrap one(x, parzen_lag_window(x, 25), PhiFunction::constant_one(), opts(25, 100));
    CHECK_THROWS_AS(one.hybrid_draws(StatisticKind::ratio), std::domain_error);
    CHECK_THROWS_AS(fb.hybrid_from_draws(fb.cbp_draws(StatisticKind::mean), fb.cbp_draws(StatisticKind::mean)),
                    std::invalid_argument);
  }

  TEST_CASE("confidence intervals")
  {
    const auto x = model_one(300, 13);
    const FrequencyBootstrap fb(x, parzen_lag_window(x, 20), PhiFunction::cos_lag(1), opts(20, 20000));
    const auto ci = fb.confidence_interval(StatisticKind::mean, 0.05);
    CHECK(ci.lower <= ci.upper);
    CHECK(ci.level == doctest::Approx(0.9));
    CHECK(ci.point == doctest::Approx(fb.point_estimate(StatisticKind::mean)));
    CHECK(ci.t_lower < 0.0);
    CHECK(ci.t_upper > 0.0);
    const double r = std::sqrt(300.0);
    CHECK(ci.lower == doctest::Approx(ci.point - ci.t_upper * ci.studentizer / r));
    CHECK(ci.upper == doctest::Approx(ci.point - ci.t_lower * ci.studentizer / r));
    // Studentized draws have unit variance when s~ is the exact closed form.
    const auto d = fb.cbp_draws(StatisticKind::mean);
    CHECK(d.variance() / (ci.studentizer * ci.studentizer) == doctest::Approx(1.0).epsilon(0.1));

    const auto half = fb.confidence_interval(StatisticKind::mean, 0.5);
    CHECK(half.lower <= half.upper);
    CHECK(half.t_lower == half.t_upper);
    const auto cr = fb.confidence_interval(StatisticKind::ratio, 0.1);
    CHECK(cr.lower < cr.point);
    CHECK(cr.upper > cr.point);
    CHECK_THROWS_AS(fb.confidence_interval(StatisticKind::mean, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fb.confidence_interval(StatisticKind::mean, 0.6), std::invalid_argument);
    const FrequencyBootstrap small(x, parzen_lag_window(x, 20), PhiFunction::cos_lag(1), opts(20, 10));
    CHECK_THROWS_AS(small.confidence_interval(StatisticKind::mean, 0.05), std::invalid_argument);
  }

  TEST_CASE("determinism across runs and thread counts")
  {
    const auto x = model_one(500, 14);
    const FrequencyBootstrap fb(x, parzen_lag_window(x, 15), PhiFunction::cos_lag(1), opts(20, 3000, 9));
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = fb.mpb_draws(StatisticKind::mean).draws;
    const auto c = fb.cbp_draws(StatisticKind::ratio).draws;
    const auto h = fb.hybrid_draws(StatisticKind::ratio).draws.draws;
    omp_set_num_threads(4);
    CHECK(fb.mpb_draws(StatisticKind::mean).draws == a);
    CHECK(fb.cbp_draws(StatisticKind::ratio).draws == c);
    CHECK(fb.hybrid_draws(StatisticKind::ratio).draws.draws == h);
    omp_set_num_threads(saved);
    CHECK(fb.mpb_draws(StatisticKind::mean, 10).draws != a);
  }
}
