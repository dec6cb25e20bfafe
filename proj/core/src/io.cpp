#include "sarcf/io.hpp"

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sarcf/errors.hpp"

namespace sarcf {

std::string format_float(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string to_csv(const Eigen::MatrixXd& m) {
    std::string out;
    out.reserve(static_cast<std::size_t>(m.size()) * 8);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_float(m(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string to_triplet_csv(const Eigen::MatrixXd& m) {
    std::string out = "i,j,w\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) {
                out += std::to_string(i);
                out += ',';
                out += std::to_string(j);
                out += ',';
                out += format_float(m(i, j));
                out += '\n';
            }
    return out;
}

namespace {

// One CSV field [begin, end); advances begin past the field and its
// trailing comma or newline.
std::string_view next_field(const char*& begin, const char* end, bool& line_done) {
    const char* start = begin;
    while (begin != end && *begin != ',' && *begin != '\n') ++begin;
    std::string_view field(start, static_cast<std::size_t>(begin - start));
    line_done = (begin == end || *begin == '\n');
    if (begin != end) ++begin;
    return field;
}

long parse_index(std::string_view field, const char* what) {
    long value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw InputError(std::string("triplet csv: bad ") + what + " field '" + std::string(field) + "'");
    return value;
}

double parse_double(std::string_view field, const char* what) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw InputError(std::string("triplet csv: bad ") + what + " field '" + std::string(field) + "'");
    return value;
}

} // namespace

Eigen::MatrixXd from_triplet_csv(const std::string& text, Eigen::Index n) {
    if (n < 0) throw InputError("triplet csv: negative dimension");
    const char* cur = text.data();
    const char* end = cur + text.size();
    bool line_done = false;

    std::string header;
    {
        const char* start = cur;
        while (cur != end && *cur != '\n') ++cur;
        header.assign(start, cur);
        if (cur != end) ++cur;
    }
    if (header != "i,j,w") throw InputError("triplet csv: expected header 'i,j,w', got '" + header + "'");

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    while (cur != end) {
        if (*cur == '\n') { ++cur; continue; } // tolerate a trailing blank line
        const long i = parse_index(next_field(cur, end, line_done), "i");
        if (line_done) throw InputError("triplet csv: truncated row");
        const long j = parse_index(next_field(cur, end, line_done), "j");
        if (line_done) throw InputError("triplet csv: truncated row");
        const double w = parse_double(next_field(cur, end, line_done), "w");
        if (!line_done) throw InputError("triplet csv: extra fields in row");
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw InputError("triplet csv: index (" + std::to_string(i) + "," + std::to_string(j) +
                             ") out of range for n=" + std::to_string(n));
        m(i, j) = w;
    }
    return m;
}

std::string population_csv(const Population& pop) {
    const Eigen::Index n = pop.chars.n();
    const Eigen::Index dc = pop.chars.coords.cols();
    const Eigen::Index qc = pop.chars.econ.size() > 0 ? pop.chars.econ.cols() : 0;

    std::string out = "unit";
    for (Eigen::Index c = 0; c < dc; ++c) out += ",coord" + std::to_string(c + 1);
    for (Eigen::Index c = 0; c < qc; ++c) out += ",econ" + std::to_string(c + 1);
    out += ",eps,d,y\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        out += std::to_string(i);
        for (Eigen::Index c = 0; c < dc; ++c) { out += ','; out += format_float(pop.chars.coords(i, c)); }
        for (Eigen::Index c = 0; c < qc; ++c) { out += ','; out += format_float(pop.chars.econ(i, c)); }
        out += ','; out += format_float(pop.eps(i));
        out += ','; out += std::to_string(pop.d(i));
        out += ','; out += format_float(pop.y(i));
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    static std::atomic<unsigned> counter{0};
    const std::string tmp = path + ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        f.flush();
        if (!f) {
            f.close();
            std::remove(tmp.c_str());
            throw std::runtime_error("write failed for '" + tmp + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        const int err = errno;
        std::remove(tmp.c_str());
        throw std::runtime_error("rename '" + tmp + "' -> '" + path + "' failed: " + std::strerror(err));
    }
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::string out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (f.bad()) throw std::runtime_error("read failed for '" + path + "'");
    return out;
}

} // namespace sarcf
