#pragma once
// Field dumps. Binary: flat little-endian float64, node-major, each r x r
// matrix row-major, each entry (re, im). CSV: header line
// "node,row,col,re,im" then one line per entry in the same order.

#include "parh/grid.hpp"
#include "parh/error.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace parh::io {

inline void put_le(std::ostream& os, double x) {
    auto u = std::bit_cast<std::uint64_t>(x);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline double get_le(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) fail("io-error", "truncated binary dump");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

inline void write_field_binary(const MatrixField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail("io-error", "cannot write '" + path + "'");
    for (const cd& z : f.data) {
        put_le(os, z.real());
        put_le(os, z.imag());
    }
}

inline MatrixField read_field_binary(const std::string& path, int rank) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) fail("io-error", "cannot read '" + path + "'");
    auto bytes = static_cast<std::size_t>(is.tellg());
    std::size_t per = std::size_t(rank) * rank * 16;
    if (rank < 1 || bytes % per) fail("io-error", "binary dump size does not match rank " + std::to_string(rank));
    is.seekg(0);
    MatrixField f(rank, int(bytes / per));
    for (auto& z : f.data) {
        double re = get_le(is);
        z = cd(re, get_le(is));
    }
    return f;
}

inline std::string field_csv(const MatrixField& f) {
    std::string out = "node,row,col,re,im\n";
    char buf[96];
    for (int n = 0; n < f.nodes(); ++n)
        for (int i = 0; i < f.rank; ++i)
            for (int j = 0; j < f.rank; ++j) {
                cd z = f.entry(n, i, j);
                std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g\n", n, i, j, z.real(), z.imag());
                out += buf;
            }
    return out;
}

inline void write_field_csv(const MatrixField& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) fail("io-error", "cannot write '" + path + "'");
    os << field_csv(f);
}

inline MatrixField read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail("io-error", "cannot read '" + path + "'");
    std::string line;
    std::getline(is, line);
    if (line != "node,row,col,re,im") fail("io-error", "unexpected CSV header '" + line + "'");
    struct E {
        int n, i, j;
        double re, im;
    };
    std::vector<E> es;
    int rank = 0, nodes = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        E e{};
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &e.n, &e.i, &e.j, &e.re, &e.im) != 5)
            fail("io-error", "malformed CSV line '" + line + "'");
        rank = std::max({rank, e.i + 1, e.j + 1});
        nodes = std::max(nodes, e.n + 1);
        es.push_back(e);
    }
    MatrixField f(rank, nodes);
    if (es.size() != f.data.size()) fail("io-error", "CSV dump is incomplete");
    for (auto& e : es) f.entry(e.n, e.i, e.j) = cd(e.re, e.im);
    return f;
}

}  // namespace parh::io
