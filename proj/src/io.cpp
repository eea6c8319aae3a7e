#include "qmcpde/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

namespace qmcpde {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::uint64_t> parse_uints(std::string_view line, std::size_t lineno) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (true) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        if (pos >= line.size()) break;
        std::uint64_t v = 0;
        const auto* first = line.data() + pos;
        const auto* last = line.data() + line.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || (ptr != last && *ptr != ' ' && *ptr != '\t'))
            throw ParseError("expected unsigned integer, got '" + std::string(line.substr(pos)) +
                                 "'",
                             lineno);
        pos = static_cast<std::size_t>(ptr - line.data());
        out.push_back(v);
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    return in;
}

} // namespace

std::vector<std::uint64_t> read_generating_vector(std::istream& in) {
    std::vector<std::uint64_t> z;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto vals = parse_uints(line, lineno);
        if (vals.size() != 1)
            throw ParseError("expected one integer per line, got " + std::to_string(vals.size()),
                             lineno);
        z.push_back(vals.front());
    }
    if (z.empty()) throw ParseError("generating vector file has no entries", lineno);
    return z;
}

std::vector<std::uint64_t> read_generating_vector(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_generating_vector(in);
}

void write_generating_vector(std::ostream& out, const std::vector<std::uint64_t>& z) {
    for (auto v : z) out << v << '\n';
}

GeneratingMatrices read_generating_matrices(std::istream& in) {
    std::string raw;
    std::size_t lineno = 0;
    std::vector<std::uint64_t> header;
    std::vector<std::vector<std::uint64_t>> rows;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto vals = parse_uints(line, lineno);
        if (header.empty()) {
            if (vals.size() != 3) throw ParseError("header must be 's m p'", lineno);
            header = std::move(vals);
            if (header[0] < 1 || header[1] < 1 || header[1] > 32 || header[2] < header[1] ||
                header[2] > 64)
                throw ParseError("header needs s >= 1, 1 <= m <= 32, m <= p <= 64", lineno);
            continue;
        }
        if (vals.size() != header[1])
            throw ParseError("expected " + std::to_string(header[1]) + " columns, got " +
                                 std::to_string(vals.size()),
                             lineno);
        for (auto c : vals)
            if (header[2] < 64 && (c >> header[2]))
                throw ParseError("column integer exceeds 2^p", lineno);
        rows.push_back(std::move(vals));
        if (rows.size() > header[0]) throw ParseError("more rows than s", lineno);
    }
    if (header.empty()) throw ParseError("missing header", lineno);
    if (rows.size() != header[0])
        throw ParseError("expected " + std::to_string(header[0]) + " rows, got " +
                             std::to_string(rows.size()),
                         lineno);
    return GeneratingMatrices(static_cast<unsigned>(header[1]), static_cast<unsigned>(header[2]),
                              std::move(rows));
}

GeneratingMatrices read_generating_matrices(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_generating_matrices(in);
}

void write_generating_matrices(std::ostream& out, const GeneratingMatrices& mats) {
    out << mats.dimension() << ' ' << mats.log2_size() << ' ' << mats.precision() << '\n';
    for (const auto& cols : mats.columns()) {
        for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? " " : "") << cols[k];
        out << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

} // namespace qmcpde
