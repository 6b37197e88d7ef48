#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace itscale {

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_number(double v);

using CsvField = std::variant<std::string, double, std::int64_t>;

/// Writes a header on construction and checks every row against its arity.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);

    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t rows() const noexcept { return rows_; }

    /// Throws std::logic_error when the row width differs from the header.
    void row(const std::vector<CsvField>& fields);

private:
    std::ostream& out_;
    std::vector<std::string> header_;
    std::size_t rows_ = 0;
};

/// Splits one CSV line on commas (no quoting; the writer never emits any).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace itscale
