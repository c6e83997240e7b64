#include "core/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace cespdc {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header) : out_(out) {
    bool first = true;
    for (auto h : header) {
        put_sep(first);
        out_ << h;
    }
    end_row();
}

void CsvWriter::put_sep(bool& first) {
    if (!first) out_ << ',';
    first = false;
}

void CsvWriter::put(double v) { out_ << format_number(v); }

void CsvWriter::put(std::int64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out_.write(buf, res.ptr - buf);
}

void CsvWriter::put(std::uint64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out_.write(buf, res.ptr - buf);
}

void CsvWriter::put(std::string_view v) { out_ << v; }

void CsvWriter::end_row() { out_ << '\n'; }

}  // namespace cespdc
