#include "fft.hpp"

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace fdb::detail {

namespace {

class PlanCache
{
public:
  ~PlanCache()
  {
    for (auto& [len, plan] : plans_)
      fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t len)
  {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(len); it != plans_.end())
      return it->second;
    // Planning touches FFTW's global state and must be serialized; the
    // new-array execute used below is thread-safe.
    double* in = fftw_alloc_real(len);
    fftw_complex* out = fftw_alloc_complex(len / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in, out,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr)
      throw std::runtime_error("FFTW planning failed");
    plans_.emplace(len, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

PlanCache& plan_cache()
{
  static PlanCache cache;
  return cache;
}

} // namespace

void squared_dft_magnitudes(std::span<const double> x, std::span<double> out)
{
  const std::size_t len = x.size();
  if (out.size() != len / 2)
    throw std::invalid_argument("squared_dft_magnitudes: output size mismatch");
  if (len < 2)
    return;
  thread_local std::vector<double> in_buf;
  thread_local std::vector<std::complex<double>> out_buf;
  in_buf.assign(x.begin(), x.end());
  out_buf.resize(len / 2 + 1);
  fftw_execute_dft_r2c(plan_cache().get(len), in_buf.data(),
                       reinterpret_cast<fftw_complex*>(out_buf.data()));
  for (std::size_t j = 1; j <= len / 2; ++j)
    out[j - 1] = std::norm(out_buf[j]);
}

} // namespace fdb::detail
