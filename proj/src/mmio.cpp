#include "schurlab/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace schurlab::mmio {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace

void write_matrix(std::ostream& os, const DenseMatrix& m) {
    os << "%%MatrixMarket matrix array real general\n";
    os << m.rows() << " " << m.cols() << "\n";
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) os << fmt_double(m(i, j)) << "\n";
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open for writing: " + path.string());
    write_matrix(os, m);
}

void write_vector(const std::filesystem::path& path, const Vector& v) {
    write_matrix(path, from_column(v));
}

DenseMatrix read_matrix(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw ParseError("matrix market: empty file");
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        throw ParseError("matrix market: bad header");
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (format != "array" && format != "coordinate")
        throw ParseError("matrix market: unsupported format " + format);
    if (field != "real" && field != "integer")
        throw ParseError("matrix market: unsupported field " + field);
    if (symmetry != "general" && symmetry != "symmetric")
        throw ParseError("matrix market: unsupported symmetry " + symmetry);

    std::string line;
    // Skip comments.
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream sizes(line);
    long rows = 0;
    long cols = 0;
    long nnz = 0;
    if (!(sizes >> rows >> cols)) throw ParseError("matrix market: bad size line");
    if (format == "coordinate" && !(sizes >> nnz))
        throw ParseError("matrix market: missing nnz");
    if (rows < 0 || cols < 0) throw ParseError("matrix market: negative dimensions");

    DenseMatrix m(static_cast<int>(rows), static_cast<int>(cols));
    if (format == "array") {
        if (symmetry == "symmetric" && rows != cols)
            throw ParseError("matrix market: symmetric matrix must be square");
        for (long j = 0; j < cols; ++j) {
            // Symmetric array files store the lower triangle only.
            const long i0 = (symmetry == "symmetric") ? j : 0;
            for (long i = i0; i < rows; ++i) {
                double v = 0.0;
                if (!(is >> v)) throw ParseError("matrix market: truncated array data");
                m(static_cast<int>(i), static_cast<int>(j)) = v;
                if (symmetry == "symmetric") m(static_cast<int>(j), static_cast<int>(i)) = v;
            }
        }
    } else {
        for (long k = 0; k < nnz; ++k) {
            long i = 0;
            long j = 0;
            double v = 0.0;
            if (!(is >> i >> j >> v)) throw ParseError("matrix market: truncated coordinate data");
            if (i < 1 || i > rows || j < 1 || j > cols)
                throw ParseError("matrix market: index out of range");
            m(static_cast<int>(i - 1), static_cast<int>(j - 1)) = v;
            if (symmetry == "symmetric") m(static_cast<int>(j - 1), static_cast<int>(i - 1)) = v;
        }
    }
    return m;
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path.string());
    return read_matrix(is);
}

Vector read_vector(const std::filesystem::path& path) {
    DenseMatrix m = read_matrix(path);
    if (m.cols() == 1) return to_vector(m);
    if (m.rows() == 1) return to_vector(transpose(m));
    throw ParseError("expected a vector in " + path.string());
}

} // namespace schurlab::mmio
