#include "gmfg/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <vector>

#include "gmfg/errors.hpp"

namespace gmfg {

void write_csv_field3(const std::string& path, const Field3& field, const TorusGrid& grid,
                      const AlphaGrid& alpha, const TimeGrid& tgrid) {
    if (field.levels != tgrid.n_levels() || field.M != alpha.M || field.n != grid.n) {
        throw InvalidInput("write_csv_field3: field does not match grids");
    }
    std::FILE* out = std::fopen(path.c_str(), "wb");
    if (!out) throw InvalidInput("write_csv_field3: cannot open '" + path + "'");
    std::fputs("t,alpha,x,value\n", out);
    char line[160];
    for (int k = 0; k < field.levels; ++k) {
        const double t = tgrid.time(k);
        for (int j = 0; j < field.M; ++j) {
            const double a = alpha.nodes[static_cast<std::size_t>(j)];
            for (int i = 0; i < field.n; ++i) {
                std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", t, a,
                              grid.nodes[static_cast<std::size_t>(i)], field(k, j, i));
                std::fputs(line, out);
            }
        }
    }
    std::fclose(out);
}

namespace {

struct CsvRow {
    double t, alpha, x, value;
};

std::vector<CsvRow> read_csv_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("csv: cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    if (header.rfind("t,alpha,x,value", 0) != 0) {
        throw InvalidInput("csv '" + path + "': missing t,alpha,x,value header");
    }
    std::vector<CsvRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CsvRow row;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &row.t, &row.alpha, &row.x,
                        &row.value) != 4) {
            throw InvalidInput("csv '" + path + "': malformed row '" + line + "'");
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace

Field3 read_csv_field3(const std::string& path, int n_levels, int M, int n) {
    const std::vector<CsvRow> rows = read_csv_rows(path);
    const std::size_t expected = static_cast<std::size_t>(n_levels) *
                                 static_cast<std::size_t>(M) * static_cast<std::size_t>(n);
    if (rows.size() != expected) {
        throw InvalidInput("csv '" + path + "': row count does not match the requested shape");
    }
    Field3 out(n_levels, M, n);
    std::size_t r = 0;
    for (int k = 0; k < n_levels; ++k) {
        for (int j = 0; j < M; ++j) {
            for (int i = 0; i < n; ++i) {
                out(k, j, i) = rows[r++].value;
            }
        }
    }
    return out;
}

AlphaSpaceField read_csv_final_slice(const std::string& path, int M, int n) {
    const std::vector<CsvRow> rows = read_csv_rows(path);
    const std::size_t slice = static_cast<std::size_t>(M) * static_cast<std::size_t>(n);
    if (rows.size() < slice || rows.size() % slice != 0) {
        throw InvalidInput("csv '" + path + "': row count is not a multiple of M*n");
    }
    const double t_final = rows.back().t;
    const std::size_t start = rows.size() - slice;
    if (rows[start].t != t_final) {
        throw InvalidInput("csv '" + path + "': final time block has unexpected size");
    }
    AlphaSpaceField out(M, n);
    std::size_t r = start;
    for (int j = 0; j < M; ++j) {
        for (int i = 0; i < n; ++i) {
            out(j, i) = rows[r++].value;
        }
    }
    return out;
}

} // namespace gmfg
