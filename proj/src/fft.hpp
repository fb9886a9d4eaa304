#pragma once

#include <cstddef>
#include <span>

namespace fdb::detail {

/// |sum_{t} x_t exp(-2 pi i j t / m)|^2 for j = 1..floor(m/2), m = x.size().
/// Thread-safe; FFTW plans are cached per length.
void squared_dft_magnitudes(std::span<const double> x, std::span<double> out);

} // namespace fdb::detail
