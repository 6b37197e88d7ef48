#include "itscale/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace itscale {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string render(const CsvField& f) {
    if (const auto* s = std::get_if<std::string>(&f)) {
        if (s->find_first_of(",\n\"") != std::string::npos) {
            throw std::invalid_argument("CSV field contains a separator: " + *s);
        }
        return *s;
    }
    if (const auto* d = std::get_if<double>(&f)) return format_number(*d);
    return std::to_string(std::get<std::int64_t>(f));
}

}  // namespace

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CsvWriter: empty header");
    for (std::size_t i = 0; i < header_.size(); ++i) {
        out_ << (i ? "," : "") << header_[i];
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvField>& fields) {
    if (fields.size() != header_.size()) {
        throw std::logic_error("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                               std::to_string(header_.size()));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        out_ << (i ? "," : "") << render(fields[i]);
    }
    out_ << '\n';
    ++rows_;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace itscale
