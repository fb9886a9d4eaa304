#include "doctest.h"
#include "oracles.hpp"

#include "fdb/harness.hpp"
#include "fdb/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace fdb;

namespace {

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double shift = 0.0)
{
  Engine rng = make_stream(seed, 0x44);
  std::normal_distribution<double> z(shift, 1.0);
  std::vector<double> v(n);
  for (auto& x : v)
    x = z(rng);
  return v;
}

ExperimentConfig small_config()
{
  ExperimentConfig c;
  c.n = 120;
  c.blocks = { 10, 120 };
  c.bootstrap_reps = 200;
  c.replications = 6;
  c.reference_reps = 300;
  c.parzen_lag = 10;
  c.batches = 3;
  c.seed = 42;
  return c;
}

} // namespace

TEST_SUITE("harness")
{
  TEST_CASE("d1 worked examples")
  {
    const DistributionSample a(normal_sample(50, 1));
    CHECK(d1_distance(a, a) == 0.0);
    CHECK(d1_distance(DistributionSample({ 0.0 }), DistributionSample({ 1.0 })) == 1.0);
    CHECK(d1_distance(DistributionSample({ 0.0, 1.0 }), DistributionSample({ 0.0, 3.0 })) == doctest::Approx(1.0));
    CHECK_THROWS_AS(d1_distance(DistributionSample{}, a), std::invalid_argument);
  }

  TEST_CASE("d1 over the merged partition matches the common refinement")
  {
    for (std::size_t na : { 1u, 3u, 7u, 12u })
      for (std::size_t nb : { 2u, 5u, 9u, 12u }) {
        const auto x = normal_sample(na, na * 31 + nb);
        const auto y = normal_sample(nb, nb * 17 + na, 0.4);
        const double d = d1_distance(DistributionSample(x), DistributionSample(y));
        CHECK(d == doctest::Approx(oracle::d1_refinement(x, y)).epsilon(1e-12));
      }
  }

  TEST_CASE("d1 metric axioms")
  {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const DistributionSample a(normal_sample(40, 3 * s));
      const DistributionSample b(normal_sample(40, 3 * s + 1, 0.3));
      const DistributionSample c(normal_sample(40, 3 * s + 2, -0.2));
      CHECK(d1_distance(a, b) == d1_distance(b, a));
      CHECK(d1_distance(a, c) <= d1_distance(a, b) + d1_distance(b, c) + 1e-12);
      CHECK(d1_distance(a, b) > 0.0);
    }
    auto v = normal_sample(100, 99);
    auto w = v;
    Engine rng = make_stream(5);
    std::shuffle(w.begin(), w.end(), rng);
    CHECK(d1_distance(DistributionSample(v), DistributionSample(w)) == 0.0);
    // Equal sizes: mean absolute difference of order statistics.
    const auto p = normal_sample(25, 7);
    const auto q = normal_sample(25, 8);
    auto ps = p, qs = q;
    std::sort(ps.begin(), ps.end());
    std::sort(qs.begin(), qs.end());
    double m = 0.0;
    for (std::size_t i = 0; i < 25; ++i)
      m += std::abs(ps[i] - qs[i]) / 25.0;
    CHECK(d1_distance(DistributionSample(p), DistributionSample(q)) == doctest::Approx(m).epsilon(1e-14));
  }

  TEST_CASE("true parameters")
  {
    ExperimentConfig c;
    c.model = ModelSpec::defaults(ModelId::I);
    CHECK(true_parameter(c) == doctest::Approx(-0.7).epsilon(1e-10));
    c.phi = PhiFunction::constant_one();
    CHECK(true_parameter(c) == doctest::Approx(1.49).epsilon(1e-10));
    c.phi = PhiFunction::cos_lag(1);
    c.statistic = StatisticKind::ratio;
    CHECK(true_parameter(c) == doctest::Approx(-0.7 / 1.49).epsilon(1e-10));
    c.model = ModelSpec::defaults(ModelId::II);
    CHECK(true_parameter(c) == doctest::Approx(-0.7 / 1.49).epsilon(1e-10));
    c.statistic = StatisticKind::mean;
    c.phi = PhiFunction::cos_lag(2);
    CHECK(std::abs(true_parameter(c)) < 1e-10);

    // Model IV plug-in: long-run gamma(1) from a shorter independent run.
    c.model = ModelSpec::defaults(ModelId::IV);
    c.phi = PhiFunction::cos_lag(1);
    c.truth_samples = 2000000;
    const double g1 = true_parameter(c);
    CHECK(true_parameter(c) == g1);
    Engine rng = make_stream(77);
    const auto path = simulate_model(c.model, 1000000, rng);
    CHECK(g1 == doctest::Approx(oracle::autocovariance(path.values, 1)).epsilon(0.02));
    CHECK(g1 < 0.0);
  }

  TEST_CASE("reference distribution")
  {
    ExperimentConfig c;
    c.reference_reps = 1;
    CHECK(reference_distribution(c).size() == 1);

    c.n = 2000;
    c.reference_reps = 10000;
    const auto ref = reference_distribution(c);
    const auto v = linear_asymptotic_variance(LinearModelOracle{ { 1.0, -0.7 }, 1.0, 9.0 }, c.phi);
    CHECK(ref.variance() == doctest::Approx(v.tau_sq).epsilon(0.1));
    CHECK(std::is_sorted(ref.values().begin(), ref.values().end()));
    CHECK(ref.values().size() == 10000);
  }

  TEST_CASE("config parsing")
  {
    const auto c = parse_config("# comment\nmodel = II\nn=300\nphi = cos:2\nstatistic = ratio\n"
                                "methods = cbp, HPB\nb = 10:20:5\nM = 50\nR = 7\nreference_reps = 99\n"
                                "lag = 12\nseed = 5\ntheta = 0.4  # trailing\n");
    CHECK(c.model.model == ModelId::II);
    CHECK(c.model.theta == 0.4);
    CHECK(c.model.innovation == Innovation::standard_normal);
    CHECK(c.n == 300);
    CHECK(c.phi.describe() == PhiFunction::cos_lag(2).describe());
    CHECK(c.statistic == StatisticKind::ratio);
    CHECK(c.methods == std::vector<Method>{ Method::cbp, Method::hpb });
    CHECK(c.blocks == std::vector<std::size_t>{ 10, 15, 20 });
    CHECK(c.bootstrap_reps == 50);
    CHECK(c.replications == 7);
    CHECK(c.reference_reps == 99);
    CHECK(c.parzen_lag == 12);
    CHECK(c.seed == 5);
    CHECK(parse_block_list("4,8, 12") == std::vector<std::size_t>{ 4, 8, 12 });
    CHECK_THROWS_AS(parse_config("bogus = 1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("R = 0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("n = 100\nb = 200"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("methods = xyz"), std::invalid_argument);
  }

  TEST_CASE("presets")
  {
    CHECK(preset("figure1", Scale::desk).size() == 4);
    CHECK(preset("figure2", Scale::full).front().model.model == ModelId::III);
    const auto t = preset("table1", Scale::full);
    CHECK(t.size() == 12);
    CHECK(t.front().reference_reps == 50000);
    CHECK(t[1].parzen_lag == 20);
    CHECK_THROWS_AS(preset("figure3", Scale::desk), std::invalid_argument);
    CHECK_THROWS_AS(parse_scale("huge"), std::invalid_argument);
  }

  TEST_CASE("batch standard error")
  {
    const std::vector<double> v{ 1, 2, 3, 4, 5, 6 };
    // batch means 1.5, 3.5, 5.5 -> sd 2, se 2 / sqrt(3)
    CHECK(batch_standard_error(v, 3) == doctest::Approx(2.0 / std::sqrt(3.0)));
    CHECK(batch_standard_error(std::vector<double>{ 1.0 }, 20) == 0.0);
  }

  TEST_CASE("distribution experiment runs, is deterministic and thread-independent")
  {
    const auto c = small_config();
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = run_distribution_experiment(c);
    omp_set_num_threads(3);
    const auto b = run_distribution_experiment(c);
    omp_set_num_threads(saved);
    std::ostringstream sa, sb;
    write_distribution_csv(sa, a.rows);
    write_distribution_csv(sb, b.rows);
    CHECK(sa.str() == sb.str());
    CHECK(a.rows.size() == 6);
    for (const auto& r : a.rows) {
      CHECK(std::isfinite(r.mean_d1));
      CHECK(r.mean_d1 >= 0.0);
      CHECK(r.se_d1 >= 0.0);
    }
    // MPB is independent of b; the b = n CBP run is a finite smoke case.
    CHECK(a.rows[0].mean_d1 == a.rows[1].mean_d1);
    CHECK(a.rows[3].b == 120);
    CHECK(sa.str().rfind("model,method,n,b,mean_d1,se_d1\n", 0) == 0);

    // Dropping a method does not shift the others' draws.
    auto c2 = c;
    c2.methods = { Method::cbp };
    const auto only = run_distribution_experiment(c2);
    CHECK(only.d1[0][0] == a.d1[1][0]);
  }

  TEST_CASE("ratio distribution experiment")
  {
    auto c = small_config();
    c.statistic = StatisticKind::ratio;
    c.blocks = { 12 };
    const auto r = run_distribution_experiment(c);
    CHECK(r.rows.size() == 3);
    for (const auto& row : r.rows)
      CHECK(std::isfinite(row.mean_d1));
  }

  TEST_CASE("standard deviation experiment")
  {
    auto c = small_config();
    CHECK_THROWS_AS(run_std_experiment(c), std::invalid_argument);
    c.statistic = StatisticKind::ratio;
    c.blocks = { 12, 15 };
    const auto rows = run_std_experiment(c);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      CHECK(r.est_ex > 0.0);
      CHECK(r.mean > 0.0);
      CHECK(r.mean_closed > 0.0);
      CHECK(r.std >= 0.0);
    }
    std::ostringstream os;
    write_std_csv(os, rows);
    CHECK(os.str().rfind("model,n,est_ex,b,mean,std,mean_closed,std_closed\n", 0) == 0);
    std::ostringstream again;
    write_std_csv(again, run_std_experiment(c));
    CHECK(os.str() == again.str());
  }
}
