#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dbec/bspline.hpp"
#include "dbec/control.hpp"
#include "dbec/field.hpp"
#include "dbec/kernel.hpp"
#include "dbec/observables.hpp"
#include "dbec/optimizer.hpp"

namespace dbec::io {

/// Binary field format: <base>.field.bin holds raw complex f64 interleaved
/// little-endian row-major samples; <base>.field.json is the sidecar with
/// shape, box, units and bookkeeping. Round-trips are bitwise.
void save_field(const ComplexField& f, const std::filesystem::path& base,
                double time_ms = 0.0);
ComplexField load_field(const std::filesystem::path& base);

/// Kernel cache: a single file with a length-prefixed JSON header
/// {Jx, Jy, Jz, Lx, Ly, Lz, oversampling, dft_convention, endianness,
/// dtype} followed by the raw multiplier array.
void save_kernel(const TruncatedKernelSpectrum& k, const std::filesystem::path& path);
/// Returns an empty optional when the file is missing or its header does
/// not match the grid.
bool try_load_kernel(const std::filesystem::path& path, const Grid3D& grid,
                     TruncatedKernelSpectrum& out);

/// FNV-1a content hash used to key cache files and tag output names.
std::uint64_t fnv1a(const void* data, std::size_t n);
std::string hash_hex(std::uint64_t h);

/// Curve serialization for run manifests: {degree, knots, coeffs} per
/// control, plus endpoints and horizon.
void save_controls(const ControlSet& set, const UnitSystem& units,
                   const std::filesystem::path& path);
ControlSet load_controls(const std::filesystem::path& path, const UnitSystem& units);

/// CSV exports. Columns are fixed by the format contracts:
///   controls:   t_ms, a_s_a0, omega_rho_Hz, omega_z_Hz
///   series:     t_ms, peak_density_um3, atoms_total, atoms_in_Z
///   history:    k, level, J, J_normalized, best_so_far, fault_flag, wall_ms
void write_control_csv(const ControlSampler& controls, const UnitSystem& units,
                       double T, int samples, const std::filesystem::path& path);
void write_series_csv(const ObservableSeries& s, const std::filesystem::path& path);
void write_history_csv(const ConvergenceHistory& h, const std::filesystem::path& path);
ConvergenceHistory read_history_csv(const std::filesystem::path& path);

/// Slice dump: raw f64 grid next to a JSON sidecar with axis ranges, plane
/// and time.
void save_slice(const DensitySlice& s, double time_ms, const std::filesystem::path& base);

} // namespace dbec::io
