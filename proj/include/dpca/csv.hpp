#ifndef DPCA_CSV_HPP
#define DPCA_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace dpca {

// Minimal line-oriented CSV reader: comma-separated, no quoting, tolerates
// trailing \r. Enough for the pipeline's plain tabular formats.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Fills `fields` with the next row; returns false at end of input.
    // Blank lines are skipped.
    bool next(std::vector<std::string>& fields);

    size_t line() const { return line_; }

private:
    std::istream& in_;
    size_t line_ = 0;
};

void split_csv_line(const std::string& line, std::vector<std::string>& fields);

// Shortest round-trip formatting for doubles; NaN -> empty string.
std::string fmt_double(double v);
std::string fmt_fixed(double v, int decimals);

} // namespace dpca

#endif
