#include "combcavity/cli.hpp"
#include "combcavity/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace combcav::cli
{

namespace
{

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void check_key(const std::string& key)
{
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
        throw ValidationError("config key '" + key + "' must have the form section.key");
}

double to_double(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf")
        return INFINITY;
    double v = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || t.empty())
        throw ValidationError("config key '" + key + "': expected a number, got '" + text + "'");
    return v;
}

} // namespace

Config Config::parse(std::istream& in, const std::filesystem::path& base_dir)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try
    {
        pt::read_ini(in, tree);
    }
    catch (const pt::ini_parser_error& e)
    {
        throw ParseError("config: " + e.message(), e.line());
    }
    Config cfg;
    cfg.base_dir_ = base_dir;
    for (const auto& [section, body] : tree)
    {
        if (body.empty() && !body.data().empty())
            throw ValidationError("config key '" + section + "' lies outside any section");
        for (const auto& [key, value] : body)
            cfg.set(section + "." + key, value.get_value<std::string>());
    }
    return cfg;
}

Config Config::load_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config file '" + path.string() + "'");
    auto dir = path.parent_path();
    return parse(in, dir.empty() ? std::filesystem::path(".") : dir);
}

void Config::set(const std::string& key, const std::string& value)
{
    const std::string k = trim(key);
    check_key(k);
    values_[k] = trim(value);
}

void Config::apply_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ValidationError("override '" + assignment + "' must look like section.key=value");
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::optional<std::string> Config::find(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end())
        return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const
{
    return find(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const
{
    auto v = find(key);
    return v ? to_double(key, *v) : fallback;
}

int Config::get_int(const std::string& key, int fallback) const
{
    auto v = find(key);
    if (!v)
        return fallback;
    const std::string t = trim(*v);
    int out = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ValidationError("config key '" + key + "': expected an integer, got '" + *v + "'");
    return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const
{
    auto v = find(key);
    if (!v)
        return fallback;
    std::string t = trim(*v);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (t == "1" || t == "true" || t == "yes" || t == "on")
        return true;
    if (t == "0" || t == "false" || t == "no" || t == "off")
        return false;
    throw ValidationError("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::optional<std::pair<double, double>> Config::get_pair(const std::string& key) const
{
    auto v = find(key);
    if (!v)
        return std::nullopt;
    const auto comma = v->find(',');
    if (comma == std::string::npos)
        throw ValidationError("config key '" + key + "': expected 'lo,hi', got '" + *v + "'");
    return std::pair{to_double(key, v->substr(0, comma)), to_double(key, v->substr(comma + 1))};
}

std::filesystem::path Config::get_path(const std::string& key) const
{
    std::filesystem::path p = get_string(key, "");
    if (p.empty() || p.is_absolute())
        return p;
    return base_dir_ / p;
}

std::string Config::canonical() const
{
    std::string out;
    for (const auto& [k, v] : values_)
        out += k + "=" + v + "\n";
    return out;
}

std::uint64_t fnv1a64(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t Config::hash() const
{
    return fnv1a64(canonical());
}

std::string Config::hash_hex() const
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

} // namespace combcav::cli
