#pragma once

// Thin FFTW wrapper. Plans are cached per (size, direction) and created under a global lock;
// execution uses the new-array interface, so calls are re-entrant. FFTW_ESTIMATE planning keeps
// results bit-reproducible from run to run.

#include <complex>
#include <span>
#include <vector>

namespace epps::fft {

using cd = std::complex<double>;

/// X_n = sum_t x_t e^{-2 pi i n t / T}.
std::vector<cd> forward(std::span<const cd> x);
/// X_n = sum_t x_t e^{+2 pi i n t / T}, unnormalised.
std::vector<cd> backward(std::span<const cd> x);

/// Real input, e^{+2 pi i n t / T} convention (the increment DFT used throughout).
std::vector<cd> backward_real(std::span<const double> x);

/// Smallest n >= min_size whose prime factors are all in {2, 3, 5, 7}.
std::size_t good_size(std::size_t min_size);

}  // namespace epps::fft
