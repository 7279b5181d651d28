#pragma once

#include <complex>
#include <cstddef>

namespace dbec::fft {

// Thin wrapper around FFTW with a per-size plan cache. Plans are created
// with FFTW_ESTIMATE so results are reproducible across processes; plan
// creation is mutex-guarded, execution is thread-safe.
//
// Convention: forward transforms are unnormalized, inverse transforms carry
// the 1/N factor. All kernel multipliers in this project are defined
// relative to this convention.

/// In-place complex-to-complex forward transform on an (nx, ny, nz) array.
void forward(int nx, int ny, int nz, std::complex<double>* data);

/// In-place complex-to-complex inverse transform, scaled by 1/(nx ny nz).
void inverse(int nx, int ny, int nz, std::complex<double>* data);

/// Out-of-place real-to-complex forward transform; out has nz/2+1 fastest
/// dimension (FFTW half-spectrum layout).
void forward_r2c(int nx, int ny, int nz, double* in, std::complex<double>* out);

/// Out-of-place complex-to-real inverse transform, scaled by 1/(nx ny nz).
/// Destroys the input array.
void inverse_c2r(int nx, int ny, int nz, std::complex<double>* in, double* out);

} // namespace dbec::fft
