#include "dpca/csv.hpp"

#include <cmath>
#include <cstdio>
#include <istream>

namespace dpca {

bool CsvReader::next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        split_csv_line(line, fields);
        return true;
    }
    return false;
}

void split_csv_line(const std::string& line, std::vector<std::string>& fields) {
    fields.clear();
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    // %.17g round-trips any double exactly.
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

} // namespace dpca
