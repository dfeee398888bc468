#include "nsv/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nsv/error.hpp"

namespace nsv {
namespace {

constexpr char kFieldMagic[8] = {'N', 'S', 'V', 'F', 'L', 'D', '0', '1'};
constexpr char kHistMagic[8] = {'N', 'S', 'V', 'H', 'S', 'T', '0', '1'};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw DomainError("cannot open '" + path + "' for writing");
    return out;
}

std::ifstream open_in(const std::string& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw DomainError("cannot open '" + path + "'");
    return in;
}

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DomainError("'" + path + "': truncated file");
    return v;
}

void put_doubles(std::ostream& os, const double* p, std::size_t n) {
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& is, double* p, std::size_t n, const std::string& path) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw DomainError("'" + path + "': truncated file");
}

void put_string(std::ostream& os, const std::string& s) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is, const std::string& path) {
    const auto len = get<std::uint32_t>(is, path);
    if (len > (1u << 20)) throw DomainError("'" + path + "': corrupt header");
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw DomainError("'" + path + "': truncated file");
    return s;
}

void check_magic(std::istream& is, const char* magic, const std::string& path) {
    char m[8];
    is.read(m, 8);
    if (!is || std::memcmp(m, magic, 8) != 0) throw DomainError("'" + path + "': not an nsv file of the expected kind");
}

GridPtr grid_for(int dim, int n, const GridPtr& given, const std::string& path) {
    if (!given) return Grid::make(dim, n);
    if (given->dim() != dim || given->n() != n)
        throw DimensionError("'" + path + "': stored grid " + std::to_string(dim) + "D n=" + std::to_string(n) +
                             " does not match the requested grid");
    return given;
}

void write_field_block(std::ostream& os, const SpectralField& u) {
    const Grid& g = u.grid();
    put<std::uint64_t>(os, g.nmodes());
    for (std::size_t m = 0; m < g.nmodes(); ++m) {
        const auto& k = g.modes()[m].k;
        for (int c = 0; c < 3; ++c) put<std::int32_t>(os, k[c]);
        for (int c = 0; c < g.dim(); ++c) {
            put<double>(os, u.at(c, m).real());
            put<double>(os, u.at(c, m).imag());
        }
    }
}

void read_field_block(std::istream& is, SpectralField& u, const std::string& path) {
    const Grid& g = u.grid();
    const auto nm = get<std::uint64_t>(is, path);
    if (nm != g.nmodes()) throw DimensionError("'" + path + "': mode count mismatch");
    for (std::size_t m = 0; m < g.nmodes(); ++m) {
        Wavevector k{};
        for (int c = 0; c < 3; ++c) k[c] = get<std::int32_t>(is, path);
        if (k != g.modes()[m].k) throw DimensionError("'" + path + "': mode order does not match the grid");
        for (int c = 0; c < g.dim(); ++c) {
            const double re = get<double>(is, path);
            const double im = get<double>(is, path);
            u.at(c, m) = cplx(re, im);
        }
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

double to_double(const std::string& s, const std::string& path, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DomainError("'" + path + "' line " + std::to_string(line) + ": bad number '" + s + "'");
    }
}

}  // namespace

const std::vector<std::string>& diagnostics_columns() {
    static const std::vector<std::string> cols{"t",         "E",         "E1",      "Pi",
                                               "Pi1",       "Phi",       "Phi1",    "Psi",
                                               "Psi1",      "Lambda_eps", "Lambda1", "norm_u_minus_theta",
                                               "norm_u_0",  "norm_u_1",  "norm_u_2", "residual"};
    return cols;
}

void write_diagnostics_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_out(path, false);
    const auto& cols = diagnostics_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (std::size_t i = 0; i < traj.reports.size(); ++i) {
        const EnergyReport& r = traj.reports[i];
        const double res = i < traj.residual.size() ? traj.residual[i] : 0.0;
        const double v[] = {r.t,   r.E,    r.E1,         r.Pi,     r.Pi1,
                            r.Phi, r.Phi1, r.Psi,        r.Psi1,   r.Lambda_eps,
                            r.Lambda1, r.norm_u_minus_theta, r.norm_u_0, r.norm_u_1, r.norm_u_2,
                            res};
        for (std::size_t c = 0; c < std::size(v); ++c) out << (c ? "," : "") << fmt(v[c]);
        out << '\n';
    }
    if (!out) throw DomainError("write failed: '" + path + "'");
}

std::vector<double> DiagnosticsTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] != name) continue;
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r[c]);
        return v;
    }
    throw DomainError("diagnostics: no column '" + name + "'");
}

DiagnosticsTable read_diagnostics_csv(const std::string& path) {
    std::ifstream in = open_in(path, false);
    DiagnosticsTable t;
    std::string line;
    if (!std::getline(in, line)) throw DomainError("'" + path + "': empty file");
    t.columns = split_csv(line);
    if (t.columns != diagnostics_columns()) throw DomainError("'" + path + "': header does not match the schema");
    std::size_t ln = 1;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != t.columns.size())
            throw DomainError("'" + path + "' line " + std::to_string(ln) + ": expected " +
                              std::to_string(t.columns.size()) + " columns");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(to_double(c, path, ln));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_series_csv(const std::string& path, const std::string& name, const std::vector<double>& t,
                      const std::vector<double>& v) {
    if (t.size() != v.size()) throw DomainError("write_series_csv: length mismatch");
    std::ofstream out = open_out(path, false);
    out << "t," << name << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) out << fmt(t[i]) << ',' << fmt(v[i]) << '\n';
}

void write_field_binary(const std::string& path, const SpectralField& u) {
    std::ofstream out = open_out(path, true);
    out.write(kFieldMagic, 8);
    put<std::int32_t>(out, u.grid().dim());
    put<std::int32_t>(out, u.grid().n());
    write_field_block(out, u);
    if (!out) throw DomainError("write failed: '" + path + "'");
}

SpectralField read_field_binary(const std::string& path, const GridPtr& grid) {
    std::ifstream in = open_in(path, true);
    check_magic(in, kFieldMagic, path);
    const int dim = get<std::int32_t>(in, path);
    const int n = get<std::int32_t>(in, path);
    SpectralField u(grid_for(dim, n, grid, path));
    read_field_block(in, u, path);
    return u;
}

void write_field_csv(const std::string& path, const SpectralField& u) {
    std::ofstream out = open_out(path, false);
    const Grid& g = u.grid();
    out << "# nsv-field dim=" << g.dim() << " n=" << g.n() << '\n';
    out << "kx,ky,kz,comp,re,im\n";
    for (std::size_t m = 0; m < g.nmodes(); ++m) {
        const auto& k = g.modes()[m].k;
        for (int c = 0; c < g.dim(); ++c)
            out << k[0] << ',' << k[1] << ',' << k[2] << ',' << c << ',' << fmt(u.at(c, m).real()) << ','
                << fmt(u.at(c, m).imag()) << '\n';
    }
}

SpectralField read_field_csv(const std::string& path, const GridPtr& grid) {
    std::ifstream in = open_in(path, false);
    std::string line;
    int dim = 0, n = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "# nsv-field dim=%d n=%d", &dim, &n) != 2)
        throw DomainError("'" + path + "': missing field header");
    SpectralField u(grid_for(dim, n, grid, path));
    std::getline(in, line);
    std::size_t ln = 2;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != 6) throw DomainError("'" + path + "' line " + std::to_string(ln) + ": expected 6 columns");
        Wavevector k{static_cast<int>(to_double(cells[0], path, ln)), static_cast<int>(to_double(cells[1], path, ln)),
                     static_cast<int>(to_double(cells[2], path, ln))};
        const int c = static_cast<int>(to_double(cells[3], path, ln));
        auto hit = u.grid().find(k);
        if (hit.index < 0 || hit.conjugate || c < 0 || c >= dim)
            throw DomainError("'" + path + "' line " + std::to_string(ln) + ": mode not on the grid");
        u.at(c, static_cast<std::size_t>(hit.index)) =
            cplx(to_double(cells[4], path, ln), to_double(cells[5], path, ln));
    }
    return u;
}

void write_history(const std::string& path, const HistoryField& eta, double t) {
    std::ofstream out = open_out(path, true);
    out.write(kHistMagic, 8);
    const SGrid& sg = eta.sgrid();
    put<std::int32_t>(out, eta.grid().dim());
    put<std::int32_t>(out, eta.grid().n());
    put<std::int32_t>(out, eta.mode() == HistoryMode::prony ? 1 : 0);
    put_string(out, eta.kernel().describe());
    put<std::uint64_t>(out, sg.M());
    put<double>(out, sg.ds_min);
    put<double>(out, sg.s_max);
    put<double>(out, t);
    put<double>(out, eta.front_position());
    write_field_block(out, eta.front_value());
    put_doubles(out, reinterpret_cast<const double*>(eta.values().data()), 2 * eta.values().size());
    put<std::uint64_t>(out, eta.moments().size());
    for (std::size_t j = 0; j < eta.moments().size(); ++j) {
        write_field_block(out, eta.moments()[j]);
        put<double>(out, eta.quad0()[j]);
        put<double>(out, eta.quad1()[j]);
    }
    if (!out) throw DomainError("write failed: '" + path + "'");
}

HistoryField read_history(const std::string& path, const Kernel& k, const GridPtr& grid, double* t) {
    std::ifstream in = open_in(path, true);
    check_magic(in, kHistMagic, path);
    const int dim = get<std::int32_t>(in, path);
    const int n = get<std::int32_t>(in, path);
    GridPtr g = grid_for(dim, n, grid, path);
    const HistoryMode mode = get<std::int32_t>(in, path) == 1 ? HistoryMode::prony : HistoryMode::grid;
    const std::string desc = get_string(in, path);
    if (desc != k.describe())
        throw ValidationError("'" + path + "': checkpoint kernel '" + desc + "' differs from '" + k.describe() + "'");
    const auto M = get<std::uint64_t>(in, path);
    const double ds_min = get<double>(in, path);
    const double s_max = get<double>(in, path);
    const double time = get<double>(in, path);
    HistoryField eta(g, k, make_sgrid(M, ds_min, s_max), mode);
    const double fs = get<double>(in, path);
    SpectralField front(g);
    read_field_block(in, front, path);
    eta.set_front(fs, front);
    get_doubles(in, reinterpret_cast<double*>(eta.values().data()), 2 * eta.values().size(), path);
    const auto nm = get<std::uint64_t>(in, path);
    if (nm != eta.moments().size()) throw DimensionError("'" + path + "': moment count mismatch");
    for (std::size_t j = 0; j < nm; ++j) {
        read_field_block(in, eta.moments()[j], path);
        eta.quad0()[j] = get<double>(in, path);
        eta.quad1()[j] = get<double>(in, path);
    }
    if (t) *t = time;
    return eta;
}

}  // namespace nsv
