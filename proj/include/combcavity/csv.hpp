#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace combcav::csv
{

// One numeric data row plus the physical line it came from.
struct Row
{
    std::size_t line = 0;
    std::vector<double> values;
};

struct Table
{
    std::vector<std::string> header;
    std::vector<Row> rows;
};

// Reads a numeric CSV with a mandatory header row. Blank lines and lines
// starting with '#' are skipped. Every data row must have exactly
// header.size() fields; violations throw ParseError naming the line.
Table read_numeric(std::istream& in);
Table read_numeric_file(const std::string& path);

// Throws ParseError unless the header matches `expected` (case-insensitive,
// surrounding whitespace ignored).
void expect_header(const Table& table, const std::vector<std::string>& expected);

// Shortest text that reads back to the same double.
std::string format_double(double v);

} // namespace combcav::csv
