#pragma once

#include <array>
#include <string>
#include <vector>

#include "nsv/integrator.hpp"

namespace nsv {

/// Fixed diagnostics column order.
const std::vector<std::string>& diagnostics_columns();

/// One row per trajectory row, %.17g, header mandatory.
void write_diagnostics_csv(const std::string& path, const Trajectory& traj);

struct DiagnosticsTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<double> column(const std::string& name) const;
};

/// Reads a diagnostics CSV; the header must match diagnostics_columns().
DiagnosticsTable read_diagnostics_csv(const std::string& path);

/// Two-column CSV "t,<name>".
void write_series_csv(const std::string& path, const std::string& name, const std::vector<double>& t,
                      const std::vector<double>& v);

// Field snapshots. Binary layout (native little-endian):
//   char[8] "NSVFLD01", int32 dim, int32 n, uint64 nmodes,
//   nmodes x { int32 k[3], dim x { double re, double im } }
// CSV layout: "# nsv-field dim=<d> n=<n>" then "kx,ky,kz,comp,re,im" rows.
void write_field_binary(const std::string& path, const SpectralField& u);
SpectralField read_field_binary(const std::string& path, const GridPtr& grid = nullptr);
void write_field_csv(const std::string& path, const SpectralField& u);
SpectralField read_field_csv(const std::string& path, const GridPtr& grid = nullptr);

// History checkpoint: header (grid, kernel description, lag grid, mode, time)
// followed by the front, the node blocks and the Prony moments. Binary
// round trips are bit-exact. Reading needs the kernel the history was built
// with; a description mismatch is rejected.
void write_history(const std::string& path, const HistoryField& eta, double t);
HistoryField read_history(const std::string& path, const Kernel& k, const GridPtr& grid, double* t = nullptr);

}  // namespace nsv
