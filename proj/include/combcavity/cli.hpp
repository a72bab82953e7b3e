#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace combcav::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitUsage = 64;

// Flat "section.key" -> value store read from INI files and overrides.
class Config
{
public:
    static Config parse(std::istream& in, const std::filesystem::path& base_dir = ".");
    static Config load_file(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    // "section.key=value"
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> find(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // "lo,hi"
    std::optional<std::pair<double, double>> get_pair(const std::string& key) const;
    // Relative paths resolve against the directory of the config file.
    std::filesystem::path get_path(const std::string& key) const;

    // Sorted "key=value" lines.
    std::string canonical() const;
    // FNV-1a 64 of canonical().
    std::uint64_t hash() const;
    std::string hash_hex() const;

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::filesystem::path& base_dir() const { return base_dir_; }

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_ = ".";
};

std::uint64_t fnv1a64(const std::string& text);

const std::vector<std::string>& subcommands();

// Entry point of the command-line tool; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace combcav::cli
