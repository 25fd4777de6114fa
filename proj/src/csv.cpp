#include "scoreval/csv.hpp"

#include <fstream>
#include <sstream>

#include "scoreval/error.hpp"

namespace scoreval {

namespace {

std::vector<std::vector<std::string>> parse_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool line_start = true;
    bool comment = false;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        if (!comment) {
            end_field();
            rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        comment = false;
        line_start = true;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (comment) {
            if (c == '\n') end_row();
            continue;
        }
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (line_start && c == '#') {
            comment = true;
            continue;
        }
        line_start = false;
        switch (c) {
            case '"': quoted = true; break;
            case ',': end_field(); break;
            case '\r': break;
            case '\n': end_row(); break;
            default: field += c;
        }
    }
    if (quoted) throw error(errc::io_error, "unterminated quoted field");
    if (!field.empty() || !row.empty()) end_row();
    return rows;
}

} // namespace

csv_table read_csv_string(const std::string& content) {
    auto rows = parse_rows(content);
    csv_table t;
    if (rows.empty()) return t;
    t.header = rows.front();
    t.rows.assign(rows.begin() + 1, rows.end());
    return t;
}

csv_table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_csv_string(ss.str());
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos && !(!field.empty() && field[0] == '#'))
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_escape(fields[i]);
    }
    os << '\n';
}

} // namespace scoreval
