#pragma once

// File formats.
//
// Field dump (binary, little-endian):
//   32-byte header: magic "EMVFLD01" (8 bytes), u32 dim, u32 N, u32 modes,
//   u32 ncomp, f64 domain length; then ncomp blocks of N^dim float64 physical
//   samples, row-major. A FluidState dumps as ncomp = dim + 2 with component
//   order [rho, m_0..m_{dim-1}, S].
//
// Ledger CSV columns:
//   t,E_kin,E_int,sobolev,ito_correction,noise_increment,residual
// where `sobolev` carries eps*((u,u)).

#include <filesystem>
#include <string>
#include <vector>

#include "eulermv/defect.hpp"
#include "eulermv/scheme.hpp"

namespace eulermv::io {

void write_field_dump(const std::filesystem::path& path, const GridSpec& grid,
                      const std::vector<const std::vector<double>*>& components);

struct FieldDump {
    GridSpec grid;
    std::vector<std::vector<double>> components;
};

FieldDump read_field_dump(const std::filesystem::path& path);

void write_state_dump(const std::filesystem::path& path, const FluidState& state);
FluidState read_state_dump(const std::filesystem::path& path);

void write_ledger_csv(const std::filesystem::path& path, const EnergyLedger& ledger);

// generic CSV writer; every cell printed with 17 significant digits
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// defect dump: per-cell binary blocks plus a text manifest describing layout
void write_defect_dump(const std::filesystem::path& binpath,
                       const std::filesystem::path& manifestpath, const DefectEstimate& d);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace eulermv::io
