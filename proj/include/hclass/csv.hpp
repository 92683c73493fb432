#ifndef HCLASS_CSV_HPP_
#define HCLASS_CSV_HPP_

#include <istream>
#include <string>
#include <vector>

namespace hclass {

// Minimal comma-separated reader for the project's file formats. Fields are
// taken verbatim (no quoting; none of the formats need embedded commas).
// Lines starting with '#' carry metadata such as the manifest hash and are
// collected separately.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;  // leading '#' lines, prefix stripped
};

std::vector<std::string> split_csv_line(const std::string& line);

// Reads header + rows; strips trailing '\r'; skips blank lines.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::string join_csv(const std::vector<std::string>& fields);

// Writes to a temporary sibling file then renames over the target.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_entire_file(const std::string& path);

}  // namespace hclass

#endif  // HCLASS_CSV_HPP_
