#include "trajstyle/trajectory/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "trajstyle/error.hpp"

namespace trajstyle::trajectory {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  for (;;) {
    const auto comma = line.find(',');
    fields.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

bool is_header(const std::vector<std::string_view>& fields) {
  std::string joined;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) joined += ',';
    for (char c : fields[i]) joined += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return joined == "t,x,y,z" || joined == "x,y,z";
}

double parse_number(std::string_view field, std::size_t line_no) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(line_no, "non-numeric field '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(line_no, "non-finite value '" + std::string(field) + "'");
  return value;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Trajectory read_csv(std::istream& in, std::optional<double> sample_rate) {
  Trajectory traj;
  std::vector<double> times;
  std::size_t columns = 0, line_no = 0;
  bool seen_data = false, seen_any = false;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    if (!seen_any) {
      seen_any = true;
      if (is_header(fields)) continue;
    }
    if (fields.size() != 3 && fields.size() != 4) {
      throw ParseError(line_no, "expected 3 or 4 columns, got " + std::to_string(fields.size()));
    }
    if (seen_data && fields.size() != columns) {
      throw ParseError(line_no, "expected " + std::to_string(columns) + " columns, got " + std::to_string(fields.size()));
    }
    columns = fields.size();
    seen_data = true;
    const std::size_t off = columns == 4 ? 1 : 0;
    if (off) times.push_back(parse_number(fields[0], line_no));
    traj.samples.push_back(
        {parse_number(fields[off], line_no), parse_number(fields[off + 1], line_no), parse_number(fields[off + 2], line_no)});
  }
  if (traj.samples.size() < 2) {
    throw ParseError(line_no, "trajectory CSV needs at least 2 rows, got " + std::to_string(traj.samples.size()));
  }
  if (sample_rate) {
    traj.sample_rate = *sample_rate;
  } else if (!times.empty()) {
    const double span = times.back() - times.front();
    if (!(span > 0.0)) throw ParseError(line_no, "timestamps must increase");
    // Round to 1e-6 Hz so timestamps printed from i / rate give back rate.
    traj.sample_rate = std::round(static_cast<double>(times.size() - 1) / span * 1e6) / 1e6;
  }
  traj.validate();
  return traj;
}

Trajectory read_csv(const std::filesystem::path& path, std::optional<double> sample_rate) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in, sample_rate);
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,x,y,z\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(static_cast<double>(i) / traj.sample_rate);
    for (double v : traj.samples[i]) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(traj, out);
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace trajstyle::trajectory
