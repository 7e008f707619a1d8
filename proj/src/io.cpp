#include "hems/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace hems::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& s, const std::string& path, int line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty())
    throw IoError(path + ":" + std::to_string(line_no) + ": not a number: '" + s + "'");
  return v;
}

long parse_hour(const std::string& s, const std::string& path, int line_no) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty())
    throw IoError(path + ":" + std::to_string(line_no) + ": not an hour: '" + s + "'");
  return v;
}

// Reads all data rows of a "col0,col1,..." CSV whose header must match
// exactly; blank lines at the end are ignored.
std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  std::string expect;
  for (const std::string& h : header) {
    if (!expect.empty()) expect += ',';
    expect += h;
  }
  if (split_fields(line) != header)
    throw IoError(path + ":1: expected header '" + expect + "', got '" + trim(line) + "'");

  std::vector<std::vector<std::string>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size())
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    rows.push_back(std::move(fields));
  }
  return rows;
}

} // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<double> read_hourly_csv(const std::string& path,
                                    const std::string& value_column) {
  const auto rows = read_rows(path, {"hour", value_column});
  if (rows.size() != 24)
    throw IoError(path + ": expected 24 hourly rows, got " + std::to_string(rows.size()));
  std::vector<double> values;
  for (int h = 0; h < 24; ++h) {
    const int line_no = h + 2;
    if (parse_hour(rows[h][0], path, line_no) != h)
      throw IoError(path + ":" + std::to_string(line_no) + ": expected hour " +
                    std::to_string(h) + ", got '" + rows[h][0] + "'");
    values.push_back(parse_number(rows[h][1], path, line_no));
  }
  return values;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename " + tmp + " to " + path);
  }
}

std::string trajectory_csv(const DecisionTrajectory& x,
                           const std::vector<double>& soc_after,
                           int start_hour) {
  x.validate();
  if (soc_after.size() != x.size())
    throw IoError("soc series length " + std::to_string(soc_after.size()) +
                  " does not match trajectory length " + std::to_string(x.size()));
  std::string out = "hour,p_grid,p_ch,p_dis,p_c,soc\n";
  for (std::size_t t = 0; t < x.size(); ++t) {
    out += std::to_string(start_hour + static_cast<int>(t));
    out += ',' + format_double(x.p_grid[t]);
    out += ',' + format_double(x.p_ch[t]);
    out += ',' + format_double(x.p_dis[t]);
    out += ',' + format_double(x.p_c[t]);
    out += ',' + format_double(soc_after[t]);
    out += '\n';
  }
  return out;
}

DecisionTrajectory parse_trajectory_csv(const std::string& path, int* start_hour) {
  const auto rows = read_rows(path, {"hour", "p_grid", "p_ch", "p_dis", "p_c", "soc"});
  if (rows.empty()) throw IoError(path + ": no data rows");
  DecisionTrajectory x;
  long first = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int line_no = static_cast<int>(i) + 2;
    const long h = parse_hour(rows[i][0], path, line_no);
    if (i == 0)
      first = h;
    else if (h != first + static_cast<long>(i))
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": hours must be consecutive, expected " +
                    std::to_string(first + static_cast<long>(i)));
    x.p_grid.push_back(parse_number(rows[i][1], path, line_no));
    x.p_ch.push_back(parse_number(rows[i][2], path, line_no));
    x.p_dis.push_back(parse_number(rows[i][3], path, line_no));
    x.p_c.push_back(parse_number(rows[i][4], path, line_no));
    parse_number(rows[i][5], path, line_no);
  }
  if (start_hour) *start_hour = static_cast<int>(first);
  return x;
}

} // namespace hems::io
