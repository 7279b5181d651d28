#include "dbec/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "dbec/errors.hpp"

namespace dbec::io {

using nlohmann::json;

namespace {

constexpr char kKernelMagic[8] = {'D', 'B', 'E', 'C', 'K', 'R', 'N', '1'};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void ensure_parent(const std::filesystem::path& p) {
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json grid_header(const Grid3D& g) {
    return json{{"shape", {g.Jx, g.Jy, g.Jz}},
                {"box_um", {g.Lx, g.Ly, g.Lz}}};
}

} // namespace

std::uint64_t fnv1a(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%012llx", static_cast<unsigned long long>(h & 0xffffffffffffull));
    return buf;
}

void save_field(const ComplexField& f, const std::filesystem::path& base, double time_ms) {
    ensure_parent(base);
    const Grid3D& g = *f.grid;
    json side = grid_header(g);
    side["units"] = {{"length", "um"}, {"time", "ms"}, {"psi", "atoms^1/2 um^-3/2"}};
    side["dtype"] = "complex f64 interleaved";
    side["endianness"] = "little";
    side["atoms"] = atom_number(f);
    side["time_ms"] = time_ms;

    std::filesystem::path jpath = base;
    jpath += ".field.json";
    std::ofstream js(jpath);
    js << side.dump(2) << "\n";

    std::filesystem::path bpath = base;
    bpath += ".field.bin";
    std::ofstream bs(bpath, std::ios::binary);
    bs.write(reinterpret_cast<const char*>(f.v.data()),
             std::streamsize(f.v.size() * sizeof(complexd)));
    if (!bs)
        throw ConfigError("save_field: write failed for " + bpath.string());
}

ComplexField load_field(const std::filesystem::path& base) {
    std::filesystem::path jpath = base;
    jpath += ".field.json";
    std::ifstream js(jpath);
    if (!js)
        throw ConfigError("load_field: missing sidecar " + jpath.string());
    json side = json::parse(js);
    const auto shape = side.at("shape");
    const auto box = side.at("box_um");
    auto grid = make_grid(box[0], box[1], box[2], shape[0], shape[1], shape[2]);

    ComplexField f(grid);
    std::filesystem::path bpath = base;
    bpath += ".field.bin";
    std::ifstream bs(bpath, std::ios::binary);
    if (!bs)
        throw ConfigError("load_field: missing data file " + bpath.string());
    bs.read(reinterpret_cast<char*>(f.v.data()),
            std::streamsize(f.v.size() * sizeof(complexd)));
    if (std::size_t(bs.gcount()) != f.v.size() * sizeof(complexd))
        throw ConfigError("load_field: short read from " + bpath.string());
    return f;
}

void save_kernel(const TruncatedKernelSpectrum& k, const std::filesystem::path& path) {
    ensure_parent(path);
    const Grid3D& g = *k.grid;
    json header = {{"Jx", g.Jx},       {"Jy", g.Jy},
                   {"Jz", g.Jz},       {"Lx", g.Lx},
                   {"Ly", g.Ly},       {"Lz", g.Lz},
                   {"oversampling", k.oversampling},
                   {"L_trunc", k.L_trunc},
                   {"dft_convention", "unnormalized-forward"},
                   {"endianness", "little"},
                   {"dtype", "f64"}};
    const std::string hs = header.dump();
    const std::uint64_t len = hs.size();
    std::ofstream out(path, std::ios::binary);
    out.write(kKernelMagic, 8);
    out.write(reinterpret_cast<const char*>(&len), 8);
    out.write(hs.data(), std::streamsize(hs.size()));
    out.write(reinterpret_cast<const char*>(k.multiplier.data()),
              std::streamsize(k.multiplier.size() * sizeof(double)));
    if (!out)
        throw ConfigError("save_kernel: write failed for " + path.string());
}

bool try_load_kernel(const std::filesystem::path& path, const Grid3D& grid,
                     TruncatedKernelSpectrum& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return false;
    char magic[8];
    std::uint64_t len = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&len), 8);
    if (!in || std::memcmp(magic, kKernelMagic, 8) != 0 || len > (1u << 20))
        return false;
    std::string hs(len, '\0');
    in.read(hs.data(), std::streamsize(len));
    json header = json::parse(hs, nullptr, false);
    if (header.is_discarded())
        return false;
    if (header.value("Jx", -1) != grid.Jx || header.value("Jy", -1) != grid.Jy ||
        header.value("Jz", -1) != grid.Jz || header.value("Lx", -1.0) != grid.Lx ||
        header.value("Ly", -1.0) != grid.Ly || header.value("Lz", -1.0) != grid.Lz)
        return false;
    out.grid = std::make_shared<const Grid3D>(grid);
    out.oversampling = header.value("oversampling", 0);
    out.L_trunc = header.value("L_trunc", 0.0);
    out.multiplier.resize(8 * grid.size());
    in.read(reinterpret_cast<char*>(out.multiplier.data()),
            std::streamsize(out.multiplier.size() * sizeof(double)));
    return std::size_t(in.gcount()) == out.multiplier.size() * sizeof(double);
}

namespace {

json curve_to_json(const ControlCurve& c) {
    if (const auto* b = std::get_if<BSplineCurve>(&c)) {
        return json{{"type", "bspline"},
                    {"degree", b->knots.degree},
                    {"knots", b->knots.knots},
                    {"coeffs", b->coeffs}};
    }
    const auto& s = std::get<SineSeries>(c);
    return json{{"type", "sum_of_sines"}, {"T_ms", s.T}, {"coeffs", s.coeffs}};
}

ControlCurve curve_from_json(const json& j) {
    if (j.at("type") == "bspline") {
        BSplineCurve b;
        b.knots.degree = j.at("degree");
        b.knots.knots = j.at("knots").get<std::vector<double>>();
        b.coeffs = j.at("coeffs").get<std::vector<double>>();
        return b;
    }
    SineSeries s;
    s.T = j.at("T_ms");
    s.coeffs = j.at("coeffs").get<std::vector<double>>();
    return s;
}

} // namespace

void save_controls(const ControlSet& set, const UnitSystem& units,
                   const std::filesystem::path& path) {
    ensure_parent(path);
    const ControlEndpoints& e = set.endpoints();
    const double a0 = PhysicalConstants::bohr_radius_a0;
    json j;
    j["T_ms"] = set.horizon();
    j["endpoints"] = {
        {"a_s_initial_a0", units.length_to_si(e.a_s_i) / a0},
        {"a_s_final_a0", units.length_to_si(e.a_s_f) / a0},
        {"omega_rho_initial_Hz", units.frequency_to_si(e.w_rho_i) / kTwoPi},
        {"omega_rho_final_Hz", units.frequency_to_si(e.w_rho_f) / kTwoPi},
        {"omega_z_initial_Hz", units.frequency_to_si(e.w_z_i) / kTwoPi},
        {"omega_z_final_Hz", units.frequency_to_si(e.w_z_f) / kTwoPi},
    };
    j["curves"] = {curve_to_json(set.u(0)), curve_to_json(set.u(1)), curve_to_json(set.u(2))};
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    if (!out)
        throw ConfigError("save_controls: write failed for " + path.string());
}

ControlSet load_controls(const std::filesystem::path& path, const UnitSystem& units) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("load_controls: cannot open " + path.string());
    json j = json::parse(in);
    const double a0 = PhysicalConstants::bohr_radius_a0;
    const auto& e = j.at("endpoints");
    ControlEndpoints ep;
    ep.a_s_i = units.length_from_si(double(e.at("a_s_initial_a0")) * a0);
    ep.a_s_f = units.length_from_si(double(e.at("a_s_final_a0")) * a0);
    ep.w_rho_i = units.frequency_from_si(double(e.at("omega_rho_initial_Hz")) * kTwoPi);
    ep.w_rho_f = units.frequency_from_si(double(e.at("omega_rho_final_Hz")) * kTwoPi);
    ep.w_z_i = units.frequency_from_si(double(e.at("omega_z_initial_Hz")) * kTwoPi);
    ep.w_z_f = units.frequency_from_si(double(e.at("omega_z_final_Hz")) * kTwoPi);
    const auto& curves = j.at("curves");
    return ControlSet(curve_from_json(curves.at(0)), curve_from_json(curves.at(1)),
                      curve_from_json(curves.at(2)), ep, j.at("T_ms"));
}

void write_control_csv(const ControlSampler& controls, const UnitSystem& units, double T,
                       int samples, const std::filesystem::path& path) {
    ensure_parent(path);
    const double a0 = PhysicalConstants::bohr_radius_a0;
    std::ofstream out(path);
    out << "t_ms,a_s_a0,omega_rho_Hz,omega_z_Hz\n";
    for (int s = 0; s < samples; ++s) {
        const double t = T * double(s) / (samples - 1);
        const PhysControls p = controls.at(t);
        out << fmt_double(t) << ',' << fmt_double(units.length_to_si(p.a_s) / a0) << ','
            << fmt_double(units.frequency_to_si(p.w_rho) / kTwoPi) << ','
            << fmt_double(units.frequency_to_si(p.w_z) / kTwoPi) << '\n';
    }
}

void write_series_csv(const ObservableSeries& s, const std::filesystem::path& path) {
    ensure_parent(path);
    std::ofstream out(path);
    out << "t_ms,peak_density_um3,atoms_total,atoms_in_Z\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << fmt_double(s.times[i]) << ',' << fmt_double(s.peak_density[i]) << ','
            << fmt_double(s.atoms_total[i]) << ',' << fmt_double(s.atoms_in_Z[i]) << '\n';
}

void write_history_csv(const ConvergenceHistory& h, const std::filesystem::path& path) {
    ensure_parent(path);
    std::ofstream out(path);
    out << "k,level,J,J_normalized,best_so_far,fault_flag,wall_ms\n";
    double best = std::numeric_limits<double>::infinity();
    for (const EvaluationRecord& r : h.records) {
        best = std::min(best, r.cost);
        out << r.k << ',' << r.level << ',' << fmt_double(r.cost) << ','
            << fmt_double(h.J_linear != 0 ? r.cost / h.J_linear : 0.0) << ','
            << fmt_double(best) << ',' << (r.fault ? 1 : 0) << ','
            << fmt_double(r.wall_ms) << '\n';
    }
}

ConvergenceHistory read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("read_history_csv: cannot open " + path.string());
    ConvergenceHistory h;
    std::string line;
    std::getline(in, line); // header
    int prev_level = std::numeric_limits<int>::min();
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        EvaluationRecord r;
        double jn = 0, best = 0;
        int fault = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%d,%lf", &r.k, &r.level, &r.cost,
                        &jn, &best, &fault, &r.wall_ms) != 7)
            throw ConfigError("read_history_csv: malformed line: " + line);
        r.fault = fault != 0;
        if (jn != 0 && h.J_linear == 0)
            h.J_linear = r.cost / jn;
        if (r.level != prev_level) {
            h.level_starts.push_back(int(h.records.size()));
            prev_level = r.level;
        }
        h.records.push_back(std::move(r));
    }
    return h;
}

void save_slice(const DensitySlice& s, double time_ms, const std::filesystem::path& base) {
    ensure_parent(base);
    json side = {{"plane", s.plane == SlicePlane::y0 ? "y0" : "z0"},
                 {"time_ms", time_ms},
                 {"fixed_index", s.fixed_index},
                 {"shape", {s.n0, s.n1}},
                 {"spacing_um", {s.d0, s.d1}},
                 {"origin_um", {s.origin0, s.origin1}},
                 {"dtype", "f64"},
                 {"endianness", "little"}};
    std::filesystem::path jpath = base;
    jpath += ".slice.json";
    std::ofstream js(jpath);
    js << side.dump(2) << "\n";
    std::filesystem::path bpath = base;
    bpath += ".slice.bin";
    std::ofstream bs(bpath, std::ios::binary);
    bs.write(reinterpret_cast<const char*>(s.density.data()),
             std::streamsize(s.density.size() * sizeof(double)));
    if (!bs)
        throw ConfigError("save_slice: write failed for " + bpath.string());
}

} // namespace dbec::io
