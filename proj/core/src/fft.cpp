#include "dbec/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace dbec::fft {

namespace {

// One cache per plan kind, keyed by dimensions. Plans are created with
// FFTW_ESTIMATE (deterministic across processes) and FFTW_UNALIGNED so the
// new-array execute interface accepts any caller buffer.
std::mutex g_mutex;

using Key = std::tuple<int, int, int>;

fftw_plan get_c2c(int nx, int ny, int nz, int sign) {
    static std::map<std::pair<Key, int>, fftw_plan> cache;
    std::lock_guard lock(g_mutex);
    auto key = std::make_pair(Key{nx, ny, nz}, sign);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    fftw_complex* buf = fftw_alloc_complex(std::size_t(nx) * ny * nz);
    fftw_plan p = fftw_plan_dft_3d(nx, ny, nz, buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    cache[key] = p;
    return p;
}

fftw_plan get_r2c(int nx, int ny, int nz) {
    static std::map<Key, fftw_plan> cache;
    std::lock_guard lock(g_mutex);
    Key key{nx, ny, nz};
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    double* in = fftw_alloc_real(std::size_t(nx) * ny * nz);
    fftw_complex* out = fftw_alloc_complex(std::size_t(nx) * ny * (nz / 2 + 1));
    fftw_plan p = fftw_plan_dft_r2c_3d(nx, ny, nz, in, out,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    cache[key] = p;
    return p;
}

fftw_plan get_c2r(int nx, int ny, int nz) {
    static std::map<Key, fftw_plan> cache;
    std::lock_guard lock(g_mutex);
    Key key{nx, ny, nz};
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    fftw_complex* in = fftw_alloc_complex(std::size_t(nx) * ny * (nz / 2 + 1));
    double* out = fftw_alloc_real(std::size_t(nx) * ny * nz);
    fftw_plan p = fftw_plan_dft_c2r_3d(nx, ny, nz, in, out,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    cache[key] = p;
    return p;
}

} // namespace

void forward(int nx, int ny, int nz, std::complex<double>* data) {
    fftw_plan p = get_c2c(nx, ny, nz, FFTW_FORWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

void inverse(int nx, int ny, int nz, std::complex<double>* data) {
    fftw_plan p = get_c2c(nx, ny, nz, FFTW_BACKWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
    const double s = 1.0 / (double(nx) * ny * nz);
    const std::size_t n = std::size_t(nx) * ny * nz;
    for (std::size_t i = 0; i < n; ++i)
        data[i] *= s;
}

void forward_r2c(int nx, int ny, int nz, double* in, std::complex<double>* out) {
    fftw_plan p = get_r2c(nx, ny, nz);
    fftw_execute_dft_r2c(p, in, reinterpret_cast<fftw_complex*>(out));
}

void inverse_c2r(int nx, int ny, int nz, std::complex<double>* in, double* out) {
    fftw_plan p = get_c2r(nx, ny, nz);
    fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in), out);
    const double s = 1.0 / (double(nx) * ny * nz);
    const std::size_t n = std::size_t(nx) * ny * nz;
    for (std::size_t i = 0; i < n; ++i)
        out[i] *= s;
}

} // namespace dbec::fft
