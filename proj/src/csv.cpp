#include "combcavity/csv.hpp"
#include "combcavity/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

namespace combcav::csv
{
namespace
{

std::string trim(std::string_view s)
{
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos)
        return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;)
    {
        auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace

Table read_numeric(std::istream& in)
{
    Table table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line))
    {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        auto fields = split(t);
        if (!have_header)
        {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        Row row{line_no, {}};
        row.values.reserve(fields.size());
        for (const auto& f : fields)
        {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw ParseError("not a number: '" + f + "'", line_no);
            row.values.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_header)
        throw ParseError("missing header row", 0);
    return table;
}

Table read_numeric_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open '" + path + "'");
    return read_numeric(in);
}

void expect_header(const Table& table, const std::vector<std::string>& expected)
{
    bool ok = table.header.size() == expected.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i)
        ok = lower(table.header[i]) == lower(expected[i]);
    if (!ok)
    {
        std::string want;
        for (const auto& e : expected)
            want += (want.empty() ? "" : ",") + e;
        throw ParseError("header must be '" + want + "'", 0);
    }
}

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace combcav::csv
