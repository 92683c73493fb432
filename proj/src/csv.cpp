#include "hclass/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hclass/errors.hpp"

namespace hclass {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t start = line.find_first_not_of("# ");
      table.comments.push_back(start == std::string::npos ? "" : line.substr(start));
      continue;
    }
    if (!have_header) {
      table.header = split_csv_line(line);
      have_header = true;
    } else {
      table.rows.push_back(split_csv_line(line));
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_validation("FileNotFound", "cannot open " + path);
  return read_csv(in);
}

std::string join_csv(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += fields[i];
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_runtime("IoError", "cannot write " + tmp);
    out << contents;
    if (!out) throw_runtime("IoError", "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw_runtime("IoError", "rename " + tmp + " -> " + path + ": " + ec.message());
}

std::string read_entire_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_validation("FileNotFound", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hclass
