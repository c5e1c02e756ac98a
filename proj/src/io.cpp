#include "eulermv/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace eulermv::io {

namespace {
constexpr char kMagic[8] = {'E', 'M', 'V', 'F', 'L', 'D', '0', '1'};

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double get_f64(std::istream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
} // namespace

void write_field_dump(const std::filesystem::path& path, const GridSpec& grid,
                      const std::vector<const std::vector<double>*>& components) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("io: cannot open '" + path.string() + "' for writing");
    os.write(kMagic, 8);
    put_u32(os, static_cast<std::uint32_t>(grid.dim));
    put_u32(os, static_cast<std::uint32_t>(grid.n));
    put_u32(os, static_cast<std::uint32_t>(grid.modes));
    put_u32(os, static_cast<std::uint32_t>(components.size()));
    put_f64(os, grid.length[0]);
    for (const auto* comp : components) {
        if (comp->size() != grid.points())
            throw ConfigError("io: component size does not match the grid");
        os.write(reinterpret_cast<const char*>(comp->data()),
                 static_cast<std::streamsize>(comp->size() * sizeof(double)));
    }
}

FieldDump read_field_dump(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("io: cannot open '" + path.string() + "'");
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw ConfigError("io: '" + path.string() + "' is not a field dump");
    FieldDump d;
    const int dim = static_cast<int>(get_u32(is));
    const int n = static_cast<int>(get_u32(is));
    const int modes = static_cast<int>(get_u32(is));
    const std::uint32_t ncomp = get_u32(is);
    const double length = get_f64(is);
    d.grid = GridSpec(dim, n, modes, length);
    d.components.resize(ncomp, std::vector<double>(d.grid.points()));
    for (auto& comp : d.components)
        is.read(reinterpret_cast<char*>(comp.data()),
                static_cast<std::streamsize>(comp.size() * sizeof(double)));
    if (!is) throw ConfigError("io: truncated field dump '" + path.string() + "'");
    return d;
}

void write_state_dump(const std::filesystem::path& path, const FluidState& state) {
    std::vector<const std::vector<double>*> comps;
    comps.push_back(&state.rho.phys());
    for (const auto& c : state.mom.comp) comps.push_back(&c.phys());
    comps.push_back(&state.S.phys());
    write_field_dump(path, state.rho.grid(), comps);
}

FluidState read_state_dump(const std::filesystem::path& path) {
    FieldDump d = read_field_dump(path);
    if (d.components.size() != static_cast<std::size_t>(d.grid.dim + 2))
        throw ConfigError("io: state dump must carry dim+2 components");
    FluidState st;
    st.rho = SpectralField::from_physical(d.grid, std::move(d.components.front()));
    for (int a = 0; a < d.grid.dim; ++a)
        st.mom.comp.push_back(SpectralField::from_physical(d.grid, std::move(d.components[1 + a])));
    st.S = SpectralField::from_physical(d.grid, std::move(d.components.back()));
    return st;
}

void write_ledger_csv(const std::filesystem::path& path, const EnergyLedger& ledger) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ledger.rows.size());
    for (const auto& r : ledger.rows)
        rows.push_back({r.t, r.e_kin, r.e_int, r.eps_uu, r.ito, r.stoch_inc, r.residual});
    write_csv(path, {"t", "E_kin", "E_int", "sobolev", "ito_correction", "noise_increment",
                     "residual"},
              rows);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream os(path);
    if (!os) throw ConfigError("io: cannot open '" + path.string() + "' for writing");
    os.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os << header[i] << (i + 1 < header.size() ? "," : "");
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << row[i] << (i + 1 < row.size() ? "," : "");
        os << "\n";
    }
}

void write_defect_dump(const std::filesystem::path& binpath,
                       const std::filesystem::path& manifestpath, const DefectEstimate& d) {
    std::ofstream os(binpath, std::ios::binary);
    if (!os) throw ConfigError("io: cannot open '" + binpath.string() + "' for writing");
    const int dim = d.coarse.dim;
    put_u32(os, static_cast<std::uint32_t>(dim));
    put_u32(os, static_cast<std::uint32_t>(d.coarse.n));
    put_u32(os, static_cast<std::uint32_t>(d.factor));
    put_u32(os, static_cast<std::uint32_t>(d.r_press.size()));
    for (std::size_t c = 0; c < d.r_press.size(); ++c) {
        for (int i = 0; i < dim * dim; ++i) put_f64(os, d.r_conv[c][i]);
        put_f64(os, d.r_press[c]);
        put_u32(os, static_cast<std::uint32_t>(d.young[c].size()));
        for (const auto& atom : d.young[c]) {
            put_f64(os, atom.rho);
            for (int a = 0; a < dim; ++a) put_f64(os, atom.m[a]);
            put_f64(os, atom.S);
            put_f64(os, atom.w);
        }
    }
    std::ostringstream man;
    man << "defect dump layout\n"
        << "binary = " << binpath.filename().string() << "\n"
        << "header = u32 dim, u32 coarse_n, u32 factor, u32 cells\n"
        << "per cell = f64 R_conv[dim*dim] (row-major), f64 R_press, u32 atom_count,\n"
        << "           atoms (f64 rho, f64 m[dim], f64 S, f64 weight)\n"
        << "cells = " << d.r_press.size() << "\n"
        << "dim = " << dim << "\n"
        << "factor = " << d.factor << "\n";
    write_text_file(manifestpath, man.str());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("io: cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("io: cannot open '" + path.string() + "' for writing");
    os << text;
}

} // namespace eulermv::io
