#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace crystalflow::fourier {

using Complex = std::complex<double>;

/// Half spectrum of a real periodic sample vector, indices k = 0..N/2.
///
/// Normalisation: c_k = (1/N) sum_j f_j exp(-2 pi i k j / N), so that
/// f(x) = sum_k c_k exp(2 pi i k x). A unit cosine has c_{+-1} = 1/2.
/// Transforms are backed by FFTW; plans are cached per size behind a mutex
/// and executed with the thread-safe new-array interface.
std::vector<Complex> forward(std::span<const double> f);

/// Inverse of forward(); `n` is the real length (even).
std::vector<double> inverse(std::span<const Complex> half, std::size_t n);

/// Applies a real Fourier multiplier symbol(w) with w = 2 pi k the angular
/// wavenumber. The Nyquist coefficient is kept only if `keep_nyquist`.
std::vector<double> apply_symbol(std::span<const double> f,
                                 const std::function<double(double)>& symbol,
                                 bool keep_nyquist = true);

/// d^order f / dx^order on the unit torus (spectral).
std::vector<double> derivative(std::span<const double> f, int order);

/// Periodic Laplacian f_xx.
std::vector<double> laplacian(std::span<const double> f);

/// Drops cached plans (tests only).
void clear_plan_cache();

}  // namespace crystalflow::fourier
