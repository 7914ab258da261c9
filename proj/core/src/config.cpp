#include "lmsim/config.hpp"

#include "lmsim/errors.hpp"
#include "lmsim/util.hpp"

#include <cctype>

namespace lmsim {

namespace {

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

struct Cursor {
    std::string_view text;
    std::size_t pos{0};
    const std::string& source;
    int line;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    void skip_space() {
        while (!done() && (peek() == ' ' || peek() == '\t')) {
            ++pos;
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source, line, msg); }
};

std::string parse_string_literal(Cursor& cur) {
    // opening quote already consumed
    std::string out;
    while (true) {
        if (cur.done()) {
            cur.fail("unterminated string");
        }
        char c = cur.text[cur.pos++];
        if (c == '"') {
            return out;
        }
        if (c == '\\') {
            if (cur.done()) {
                cur.fail("unterminated escape");
            }
            char e = cur.text[cur.pos++];
            switch (e) {
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            default: cur.fail(std::string("unknown escape '\\") + e + "'");
            }
        } else {
            out.push_back(c);
        }
    }
}

ConfigValue parse_scalar(Cursor& cur);

ConfigValue parse_array(Cursor& cur) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::array;
    v.line = cur.line;
    cur.skip_space();
    if (!cur.done() && cur.peek() == ']') {
        ++cur.pos;
        return v;
    }
    while (true) {
        cur.skip_space();
        if (cur.done()) {
            cur.fail("unterminated array");
        }
        v.items.push_back(parse_scalar(cur));
        cur.skip_space();
        if (cur.done()) {
            cur.fail("unterminated array");
        }
        char c = cur.text[cur.pos++];
        if (c == ']') {
            return v;
        }
        if (c != ',') {
            cur.fail("expected ',' or ']' in array");
        }
    }
}

ConfigValue parse_scalar(Cursor& cur) {
    ConfigValue v;
    v.line = cur.line;
    char c = cur.peek();
    if (c == '"') {
        ++cur.pos;
        v.kind = ConfigValue::Kind::string_;
        v.str = parse_string_literal(cur);
        return v;
    }
    if (c == '[') {
        ++cur.pos;
        return parse_array(cur);
    }
    std::size_t start = cur.pos;
    while (!cur.done() && cur.peek() != ',' && cur.peek() != ']' && cur.peek() != '#' &&
           cur.peek() != ' ' && cur.peek() != '\t') {
        ++cur.pos;
    }
    std::string token(cur.text.substr(start, cur.pos - start));
    if (token == "true" || token == "false") {
        v.kind = ConfigValue::Kind::boolean;
        v.boolean = (token == "true");
        return v;
    }
    if (token.find_first_of(".eE") == std::string::npos &&
        token.find_first_not_of("+-0123456789") == std::string::npos) {
        if (auto i = parse_int(token)) {
            v.kind = ConfigValue::Kind::integer;
            v.integer = *i;
            v.real = static_cast<double>(*i);
            return v;
        }
        // fall through: 64-bit unsigned seeds overflow long long
        if (auto u = parse_uint(token)) {
            v.kind = ConfigValue::Kind::integer;
            v.integer = static_cast<long long>(*u);
            v.real = static_cast<double>(*u);
            return v;
        }
    }
    if (auto d = parse_double(token)) {
        v.kind = ConfigValue::Kind::real;
        v.real = *d;
        return v;
    }
    cur.fail("cannot parse value '" + token + "'");
}

} // namespace

void ConfigTable::insert(std::string key, ConfigValue value, const std::string& source, int line) {
    if (values_.contains(key)) {
        throw ParseError(source, line, "duplicate key '" + key + "'");
    }
    values_.emplace(std::move(key), std::move(value));
}

bool ConfigTable::contains(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        return false;
    }
    consumed_[key] = true;
    return true;
}

const ConfigValue& ConfigTable::require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw ValidationError(key, "missing required key");
    }
    consumed_[key] = true;
    return it->second;
}

std::string ConfigTable::get_string(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::string_) {
        throw ValidationError(key, "expected a string");
    }
    return v.str;
}

long long ConfigTable::get_int(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::integer) {
        throw ValidationError(key, "expected an integer");
    }
    return v.integer;
}

std::uint64_t ConfigTable::get_uint(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::integer) {
        throw ValidationError(key, "expected an integer");
    }
    return static_cast<std::uint64_t>(v.integer);
}

double ConfigTable::get_double(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::integer && v.kind != ConfigValue::Kind::real) {
        throw ValidationError(key, "expected a number");
    }
    return v.real;
}

bool ConfigTable::get_bool(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::boolean) {
        throw ValidationError(key, "expected true or false");
    }
    return v.boolean;
}

std::vector<std::string> ConfigTable::get_string_array(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::array) {
        throw ValidationError(key, "expected an array");
    }
    std::vector<std::string> out;
    for (const ConfigValue& item : v.items) {
        if (item.kind != ConfigValue::Kind::string_) {
            throw ValidationError(key, "expected an array of strings");
        }
        out.push_back(item.str);
    }
    return out;
}

std::vector<double> ConfigTable::get_double_array(const std::string& key) const {
    const ConfigValue& v = require(key);
    if (v.kind != ConfigValue::Kind::array) {
        throw ValidationError(key, "expected an array");
    }
    std::vector<double> out;
    for (const ConfigValue& item : v.items) {
        if (item.kind != ConfigValue::Kind::integer && item.kind != ConfigValue::Kind::real) {
            throw ValidationError(key, "expected an array of numbers");
        }
        out.push_back(item.real);
    }
    return out;
}

std::string ConfigTable::get_string_or(const std::string& key, const std::string& fallback) const {
    return contains(key) ? get_string(key) : fallback;
}

long long ConfigTable::get_int_or(const std::string& key, long long fallback) const {
    return contains(key) ? get_int(key) : fallback;
}

double ConfigTable::get_double_or(const std::string& key, double fallback) const {
    return contains(key) ? get_double(key) : fallback;
}

bool ConfigTable::get_bool_or(const std::string& key, bool fallback) const {
    return contains(key) ? get_bool(key) : fallback;
}

std::vector<std::string> ConfigTable::unconsumed_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        auto it = consumed_.find(key);
        if (it == consumed_.end() || !it->second) {
            out.push_back(key);
        }
    }
    return out;
}

ConfigTable parse_config_text(std::string_view text, std::string source) {
    ConfigTable table;
    table.set_source(source);

    std::string section;
    int lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string_view raw;
        if (end == std::string_view::npos) {
            if (start >= text.size()) {
                break;
            }
            raw = text.substr(start);
            start = text.size() + 1;
        } else {
            raw = text.substr(start, end - start);
            start = end + 1;
        }
        ++lineno;

        Cursor cur{raw, 0, source, lineno};
        cur.skip_space();
        if (cur.done() || cur.peek() == '#') {
            continue;
        }

        if (cur.peek() == '[') {
            ++cur.pos;
            std::size_t name_start = cur.pos;
            while (!cur.done() && (is_bare_key_char(cur.peek()) || cur.peek() == '.')) {
                ++cur.pos;
            }
            if (cur.done() || cur.peek() != ']') {
                cur.fail("malformed section header");
            }
            section = std::string(raw.substr(name_start, cur.pos - name_start));
            if (section.empty()) {
                cur.fail("empty section name");
            }
            ++cur.pos;
            cur.skip_space();
            if (!cur.done() && cur.peek() != '#') {
                cur.fail("trailing characters after section header");
            }
            continue;
        }

        std::size_t key_start = cur.pos;
        while (!cur.done() && is_bare_key_char(cur.peek())) {
            ++cur.pos;
        }
        std::string key(raw.substr(key_start, cur.pos - key_start));
        if (key.empty()) {
            cur.fail("expected a key");
        }
        cur.skip_space();
        if (cur.done() || cur.peek() != '=') {
            cur.fail("expected '=' after key '" + key + "'");
        }
        ++cur.pos;
        cur.skip_space();
        if (cur.done()) {
            cur.fail("missing value for key '" + key + "'");
        }
        ConfigValue value = parse_scalar(cur);
        cur.skip_space();
        if (!cur.done() && cur.peek() != '#') {
            cur.fail("trailing characters after value for key '" + key + "'");
        }

        std::string full = section.empty() ? key : section + "." + key;
        table.insert(std::move(full), std::move(value), source, lineno);
    }
    return table;
}

ConfigTable parse_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_text_file(path), path.filename().string());
}

} // namespace lmsim
