#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "dbec/io.hpp"

using namespace dbec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("dbec_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("field files round-trip bitwise") {
    TempDir tmp;
    auto g = make_grid(4.0, 5.0, 6.0, 16, 12, 10);
    ComplexField f(g);
    std::mt19937_64 rng(3);
    for (complexd& v : f.v)
        v = complexd(double(rng() >> 11) * 0x1.0p-53, double(rng() >> 11) * 0x1.0p-53);

    io::save_field(f, tmp.path / "psi", 1.25);
    const ComplexField r = io::load_field(tmp.path / "psi");
    REQUIRE(r.grid->same_as(*g));
    for (std::size_t i = 0; i < f.v.size(); ++i)
        REQUIRE(r.v[i] == f.v[i]);

    CHECK_THROWS_AS(io::load_field(tmp.path / "missing"), ConfigError);
}

TEST_CASE("kernel cache round trip and header validation") {
    TempDir tmp;
    auto g = make_grid(1.0, 1.0, 2.0, 8, 8, 16);
    const TruncatedKernelSpectrum k = precompute_truncated_kernel(g);
    io::save_kernel(k, tmp.path / "kernel.bin");

    TruncatedKernelSpectrum loaded;
    REQUIRE(io::try_load_kernel(tmp.path / "kernel.bin", *g, loaded));
    CHECK(loaded.oversampling == k.oversampling);
    CHECK(loaded.L_trunc == k.L_trunc);
    REQUIRE(loaded.multiplier.size() == k.multiplier.size());
    for (std::size_t i = 0; i < k.multiplier.size(); ++i)
        REQUIRE(loaded.multiplier[i] == k.multiplier[i]);

    // mismatched grid is refused
    const Grid3D other = build_grid(1.0, 1.0, 2.0, 16, 16, 16);
    CHECK_FALSE(io::try_load_kernel(tmp.path / "kernel.bin", other, loaded));
    CHECK_FALSE(io::try_load_kernel(tmp.path / "nothere.bin", *g, loaded));
}

TEST_CASE("controls JSON round trip") {
    TempDir tmp;
    const UnitSystem u = UnitSystem::um_ms_atom(SpeciesParams::dy164().mass_m);
    const ControlEndpoints ep = ControlEndpoints::defaults(u);
    std::mt19937_64 rng(5);
    CoefficientVector c(coefficients_per_level(3));
    for (double& v : c)
        v = double(rng() >> 11) * 0x1.0p-53;
    const ControlSet set = assemble_controls(c, 3, ep, 2.0);

    io::save_controls(set, u, tmp.path / "controls.json");
    const ControlSet r = io::load_controls(tmp.path / "controls.json", u);
    CHECK(r.horizon() == set.horizon());
    for (double t : {0.0, 0.33, 1.0, 1.77, 2.0}) {
        const PhysControls a = set.at(t), b = r.at(t);
        CHECK(a.a_s == doctest::Approx(b.a_s).epsilon(1e-14));
        CHECK(a.w_rho == doctest::Approx(b.w_rho).epsilon(1e-14));
        CHECK(a.w_z == doctest::Approx(b.w_z).epsilon(1e-14));
    }
}

TEST_CASE("history CSV round trip preserves the series") {
    TempDir tmp;
    ConvergenceHistory h;
    h.J_linear = 2.5;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 40; ++i) {
        EvaluationRecord r;
        r.k = i + 1;
        r.level = 1 + i / 10;
        r.cost = 2.5 * double(rng() >> 11) * 0x1.0p-53;
        r.wall_ms = 12.5 + i;
        r.fault = (i == 17);
        h.records.push_back(r);
    }
    io::write_history_csv(h, tmp.path / "history.csv");
    const ConvergenceHistory r = io::read_history_csv(tmp.path / "history.csv");
    REQUIRE(r.records.size() == h.records.size());
    CHECK(r.J_linear == doctest::Approx(h.J_linear).epsilon(1e-14));
    for (std::size_t i = 0; i < h.records.size(); ++i) {
        CHECK(r.records[i].k == h.records[i].k);
        CHECK(r.records[i].level == h.records[i].level);
        CHECK(r.records[i].cost == h.records[i].cost); // %.17g is exact
        CHECK(r.records[i].fault == h.records[i].fault);
    }
    CHECK(r.level_starts == std::vector<int>{0, 10, 20, 30});
}

TEST_CASE("series and control CSV files are written with headers") {
    TempDir tmp;
    ObservableSeries s;
    s.times = {0.0, 0.5};
    s.peak_density = {1.0, 2.0};
    s.atoms_total = {100.0, 99.0};
    s.atoms_in_Z = {90.0, 91.0};
    io::write_series_csv(s, tmp.path / "series.csv");

    const UnitSystem u = UnitSystem::um_ms_atom(SpeciesParams::dy164().mass_m);
    const ControlSet set = assemble_controls(linear_ramp_coefficients(1, 2.0), 1,
                                             ControlEndpoints::defaults(u), 2.0);
    io::write_control_csv(set, u, 2.0, 21, tmp.path / "controls.csv");

    std::ifstream a(tmp.path / "series.csv"), b(tmp.path / "controls.csv");
    std::string line;
    std::getline(a, line);
    CHECK(line == "t_ms,peak_density_um3,atoms_total,atoms_in_Z");
    std::getline(b, line);
    CHECK(line == "t_ms,a_s_a0,omega_rho_Hz,omega_z_Hz");
    int rows = 0;
    while (std::getline(b, line))
        ++rows;
    CHECK(rows == 21);
}

TEST_CASE("fnv1a hashing is stable") {
    const char data[] = "dbec";
    const std::uint64_t h = io::fnv1a(data, 4);
    CHECK(h == io::fnv1a(data, 4));
    CHECK(io::hash_hex(h).size() == 12);
}

TEST_CASE("slice dump writes sidecar and payload") {
    TempDir tmp;
    auto g = make_grid(4.0, 4.0, 8.0, 16, 16, 16);
    const ComplexField psi = gaussian_field(g, 0.5, 0.5, 1.0, 0, 0, 0, 10.0);
    const DensitySlice s = density_slice(psi, SlicePlane::y0);
    io::save_slice(s, 2.0, tmp.path / "snap");
    CHECK(fs::exists(tmp.path / "snap.slice.json"));
    CHECK(fs::file_size(tmp.path / "snap.slice.bin") == s.density.size() * sizeof(double));
}
