#pragma once

#include "fdb/bootstrap.hpp"
#include "fdb/dgp.hpp"
#include "fdb/stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fdb {

/// An empirical distribution, stored sorted ascending.
class DistributionSample
{
public:
  DistributionSample() = default;
  explicit DistributionSample(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const double> values() const noexcept { return values_; }
  double mean() const;
  double variance() const; // divisor size - 1
  double sd() const;

private:
  std::vector<double> values_;
};

/// Exact integral over (0,1) of |F^{-1} - G^{-1}| for the two empirical
/// quantile step functions. Throws std::invalid_argument on empty input.
double d1_distance(const DistributionSample& a, const DistributionSample& b);

enum class Method
{
  mpb,
  cbp,
  hpb,
};

std::string to_string(Method m);
Method parse_method(const std::string& s);

struct ExperimentConfig
{
  ModelSpec model = ModelSpec::defaults(ModelId::I);
  std::size_t n = 150;
  PhiFunction phi = PhiFunction::cos_lag(1);
  StatisticKind statistic = StatisticKind::mean;
  std::vector<Method> methods{ Method::mpb, Method::cbp, Method::hpb };
  std::vector<std::size_t> blocks{ 18 };
  std::size_t bootstrap_reps = 1000;    // M
  std::size_t replications = 200;       // R
  std::size_t reference_reps = 10000;
  std::size_t parzen_lag = 15;          // M_n; 0 selects the kernel estimate
  double bandwidth = 0.0;               // h for the kernel estimate
  std::size_t truth_samples = 10000000; // plug-in length for Model IV
  std::size_t batches = 20;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on zero counts, empty method or block
  /// lists, or blocks outside [2, n].
  void validate() const;
};

/// key = value lines; '#' starts a comment. Keys: model, n, theta, phi_ar,
/// a0, a1, innovation, burn_in, phi, statistic, methods, b (list or
/// lo:hi:step), M, R, reference_reps, lag, bandwidth, truth_samples,
/// batches, seed. Missing keys keep the value in `base`.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

std::vector<std::size_t> parse_block_list(const std::string& text);

/// Spectral estimate used for f^ by every experiment.
SpectralEstimate experiment_estimate(const ExperimentConfig& config, const SeriesSample& x);

/// M(phi, f) or R(phi, f) for the configured model. Models I-III use the
/// closed-form MA(1) spectral density; Model IV uses autocovariances of one
/// long simulated path of length truth_samples, cached per configuration.
double true_parameter(const ExperimentConfig& config);

/// reference_reps independent values of sqrt(n) (statistic - truth), with
/// the statistic in its integral (time-domain) form.
DistributionSample reference_distribution(const ExperimentConfig& config);

struct DistributionRow
{
  ModelId model;
  Method method;
  std::size_t n;
  std::size_t b;
  double mean_d1;
  double se_d1; // batch-means standard error
};

struct DistributionResult
{
  std::vector<DistributionRow> rows;
  // d1[method][block][replication], in config order
  std::vector<std::vector<std::vector<double>>> d1;
  DistributionSample reference;
};

/// Batch-means standard error of the mean of `values`.
double batch_standard_error(std::span<const double> values, std::size_t batches);

/// Mean d1 between each method's M bootstrap draws and the reference
/// distribution over R outer replications. MPB does not depend on b: its
/// draws are generated once per replication and repeated on every b row.
DistributionResult run_distribution_experiment(const ExperimentConfig& config);

struct StdRow
{
  ModelId model;
  std::size_t n;
  double est_ex; // reference standard deviation
  std::size_t b;
  double mean;   // Monte-Carlo bootstrap sd, averaged over R
  double std;
  double mean_closed; // closed-form studentizer, averaged over R
  double std_closed;
};

/// Table-1 style rows for the ratio statistic.
std::vector<StdRow> run_std_experiment(const ExperimentConfig& config);

enum class Scale
{
  desk,
  full,
};

Scale parse_scale(const std::string& s);

/// Configurations for "figure1" (Models I, II), "figure2" (III, IV) and
/// "table1" (all four models, n = 150, 300, 500).
std::vector<ExperimentConfig> preset(const std::string& name, Scale scale);

void write_distribution_csv(std::ostream& os, std::span<const DistributionRow> rows, bool header = true);
void write_std_csv(std::ostream& os, std::span<const StdRow> rows, bool header = true);

} // namespace fdb
