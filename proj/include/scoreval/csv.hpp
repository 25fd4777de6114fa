#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace scoreval {

// RFC-4180-style CSV: quoted fields may contain commas, doubled quotes and
// newlines. Lines starting with '#' outside of a quoted field are comments.
struct csv_table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

csv_table read_csv(const std::filesystem::path&);
csv_table read_csv_string(const std::string& content);

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream&, const std::vector<std::string>& fields);

} // namespace scoreval
