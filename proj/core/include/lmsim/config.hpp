#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lmsim {

/// Scalar or flat array value from a scenario configuration file.
struct ConfigValue {
    enum class Kind { string_, integer, real, boolean, array };

    Kind kind{Kind::string_};
    std::string str;
    long long integer{0};
    double real{0.0};
    bool boolean{false};
    std::vector<ConfigValue> items;
    int line{0};
};

/// Parsed scenario file: a TOML-style hierarchy flattened to dotted keys.
///
/// Supported syntax: `[section]` / `[section.sub]` headers, `key = value`
/// with string literals in double quotes, integers, floats, booleans and
/// homogeneous arrays of those, and `#` comments. That subset covers the
/// whole scenario surface and keeps the files hand-editable.
class ConfigTable {
public:
    void insert(std::string key, ConfigValue value, const std::string& source, int line);

    bool contains(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;
    double get_double(const std::string& key) const; // integers promote
    bool get_bool(const std::string& key) const;
    std::vector<std::string> get_string_array(const std::string& key) const;
    std::vector<double> get_double_array(const std::string& key) const;

    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    double get_double_or(const std::string& key, double fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    /// Keys never read through an accessor; load_scenario rejects them so
    /// misspelled parameters fail loudly instead of silently defaulting.
    std::vector<std::string> unconsumed_keys() const;

    const std::string& source() const noexcept { return source_; }
    void set_source(std::string s) { source_ = std::move(s); }

private:
    const ConfigValue& require(const std::string& key) const;

    std::map<std::string, ConfigValue> values_;
    mutable std::map<std::string, bool> consumed_;
    std::string source_;
};

ConfigTable parse_config_text(std::string_view text, std::string source);
ConfigTable parse_config_file(const std::filesystem::path& path);

} // namespace lmsim
