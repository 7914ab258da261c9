#pragma once

#include "lmsim/util.hpp"

#include <cassert>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace lmsim {

/// Minimal streaming JSON writer with deterministic output.
///
/// Numbers go through format_double, the same routine the CSV emitters
/// use, so a value copied from a CSV into a report serializes to the
/// identical byte sequence.
class JsonWriter {
public:
    explicit JsonWriter(int indent = 2) : indent_(indent) {}

    JsonWriter& begin_object() {
        prefix();
        out_ += '{';
        stack_.push_back(Frame{true, 0});
        return *this;
    }

    JsonWriter& end_object() {
        assert(!stack_.empty() && stack_.back().is_object);
        bool had_items = stack_.back().count > 0;
        stack_.pop_back();
        if (had_items) {
            newline_indent();
        }
        out_ += '}';
        return *this;
    }

    JsonWriter& begin_array() {
        prefix();
        out_ += '[';
        stack_.push_back(Frame{false, 0});
        return *this;
    }

    JsonWriter& end_array() {
        assert(!stack_.empty() && !stack_.back().is_object);
        bool had_items = stack_.back().count > 0;
        stack_.pop_back();
        if (had_items) {
            newline_indent();
        }
        out_ += ']';
        return *this;
    }

    JsonWriter& key(std::string_view name) {
        assert(!stack_.empty() && stack_.back().is_object);
        separate();
        newline_indent_inside();
        append_string(name);
        out_ += ": ";
        pending_key_ = true;
        return *this;
    }

    JsonWriter& value(std::string_view s) {
        prefix();
        append_string(s);
        return *this;
    }

    JsonWriter& value(const char* s) { return value(std::string_view(s)); }

    JsonWriter& value(bool b) {
        prefix();
        out_ += b ? "true" : "false";
        return *this;
    }

    JsonWriter& value(long long i) {
        prefix();
        out_ += std::to_string(i);
        return *this;
    }

    JsonWriter& value(std::uint64_t u) {
        prefix();
        out_ += std::to_string(u);
        return *this;
    }

    JsonWriter& value(int i) { return value(static_cast<long long>(i)); }

    JsonWriter& value(double d) {
        prefix();
        out_ += format_double(d);
        return *this;
    }

    /// Emits a pre-rendered numeric token verbatim.
    JsonWriter& raw_number(std::string_view token) {
        prefix();
        out_.append(token);
        return *this;
    }

    std::string str() const { return out_ + "\n"; }

private:
    struct Frame {
        bool is_object;
        int count;
    };

    void separate() {
        if (!stack_.empty() && stack_.back().count > 0) {
            out_ += ',';
        }
        if (!stack_.empty()) {
            ++stack_.back().count;
        }
    }

    void newline_indent_inside() {
        out_ += '\n';
        out_.append(static_cast<std::size_t>(indent_) * stack_.size(), ' ');
    }

    void newline_indent() {
        out_ += '\n';
        out_.append(static_cast<std::size_t>(indent_) * stack_.size(), ' ');
    }

    // Array elements separate themselves; object values follow their key.
    void prefix() {
        if (pending_key_) {
            pending_key_ = false;
            return;
        }
        if (!stack_.empty() && !stack_.back().is_object) {
            separate();
            newline_indent_inside();
        }
    }

    void append_string(std::string_view s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
            case '"': out_ += "\\\""; break;
            case '\\': out_ += "\\\\"; break;
            case '\n': out_ += "\\n"; break;
            case '\t': out_ += "\\t"; break;
            case '\r': out_ += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out_ += buf;
                } else {
                    out_ += c;
                }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<Frame> stack_;
    int indent_;
    bool pending_key_{false};
};

} // namespace lmsim
