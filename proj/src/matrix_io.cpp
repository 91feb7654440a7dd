#include "risknet/matrix_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "risknet/errors.hpp"

namespace risknet::io {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
        throw InvalidArgument("not a number: '" + std::string(text) + "'");
    return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : comma - start);
        while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
            field.remove_prefix(1);
        while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
            field.remove_suffix(1);
        fields.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

void write_matrix(std::ostream& out, const SquareMatrix& m) {
    for (std::size_t i = 0; i < m.n(); ++i) {
        for (std::size_t j = 0; j < m.n(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

SquareMatrix read_matrix(std::istream& in) {
    std::vector<double> values;
    std::size_t n = 0;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (rows == 0) n = fields.size();
        if (fields.size() != n)
            throw DimensionMismatch("ragged matrix row " + std::to_string(rows));
        for (const auto& f : fields) values.push_back(parse_double(f));
        ++rows;
    }
    if (rows == 0) throw EmptyInput("matrix file has no rows");
    if (rows != n)
        throw DimensionMismatch("matrix is " + std::to_string(rows) + "x" + std::to_string(n) +
                                ", expected square");
    return SquareMatrix(n, std::move(values));
}

void write_matrix_file(const std::filesystem::path& path, const SquareMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    write_matrix(out, m);
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

SquareMatrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    return read_matrix(in);
}

std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        std::vector<double> row;
        try {
            for (const auto& f : fields) row.push_back(parse_double(f));
        } catch (const InvalidArgument&) {
            if (first) {
                first = false;
                continue;
            }
            throw;
        }
        first = false;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace risknet::io
