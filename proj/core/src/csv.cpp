#include "lmsim/csv.hpp"

#include "lmsim/errors.hpp"
#include "lmsim/util.hpp"

namespace lmsim {

namespace {

std::vector<std::string> parse_line(std::string_view line, const std::string& source, int lineno) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            if (!current.empty()) {
                throw ParseError(source, lineno, "unexpected quote inside unquoted field");
            }
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
        ++i;
    }
    if (quoted) {
        throw ParseError(source, lineno, "unterminated quoted field");
    }
    fields.push_back(trim(current));
    return fields;
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw ParseError(source, 1, "missing column '" + name + "'");
}

CsvTable parse_csv(std::string_view text, std::string source) {
    CsvTable table;
    table.source = std::move(source);
    int lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string_view line;
        if (end == std::string_view::npos) {
            if (start == text.size()) {
                break;
            }
            line = text.substr(start);
            start = text.size() + 1;
        } else {
            line = text.substr(start, end - start);
            start = end + 1;
        }
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        auto fields = parse_line(line, table.source, lineno);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError(table.source, lineno,
                             "expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) {
        throw ParseError(table.source, 1, "missing header row");
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_text_file(path), path.filename().string());
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out.push_back(',');
        }
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out.push_back('"');
            for (char c : f) {
                if (c == '"') {
                    out.push_back('"');
                }
                out.push_back(c);
            }
            out.push_back('"');
        } else {
            out += f;
        }
    }
    out.push_back('\n');
    return out;
}

} // namespace lmsim
