#pragma once

#include <complex>
#include <span>

namespace phychal::detail {

// Unitary DFT (1/sqrt(n) both directions), out-of-place. Plans are cached
// per (size, direction) and created with deterministic planning, so results
// are bit-identical run to run; execution is safe from multiple threads.
void fft_unitary_forward(std::span<const std::complex<double>> in,
                         std::span<std::complex<double>> out);
void fft_unitary_backward(std::span<const std::complex<double>> in,
                          std::span<std::complex<double>> out);

} // namespace phychal::detail
