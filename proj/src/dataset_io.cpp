#include "crtrial/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>
#include <vector>

namespace crtrial {

ParseError::ParseError(const std::string& source, long line, const std::string& reason)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + reason), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  bool have_header = false;
  Dataset data;
  std::unordered_set<std::string> ids;

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);
    if (!have_header) {
      if (fields.size() != 4 || fields[0] != "id" || fields[1] != "arm" || fields[2] != "time" || fields[3] != "status") {
        throw ParseError(source, line_no, "expected header 'id,arm,time,status'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 4) {
      throw ParseError(source, line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    }

    EventRecord r;
    r.id = std::string(fields[0]);
    if (r.id.empty()) throw ParseError(source, line_no, "empty id");
    if (!ids.insert(r.id).second) throw ParseError(source, line_no, "duplicate id '" + r.id + "'");

    if (fields[1] == "T") {
      r.arm = Arm::treatment;
    } else if (fields[1] == "C") {
      r.arm = Arm::control;
    } else {
      throw ParseError(source, line_no, "unknown arm label '" + std::string(fields[1]) + "' (expected T or C)");
    }

    const auto time_field = fields[2];
    auto [end, ec] = std::from_chars(time_field.data(), time_field.data() + time_field.size(), r.time);
    if (ec != std::errc() || end != time_field.data() + time_field.size() || !std::isfinite(r.time) || !(r.time > 0.0)) {
      throw ParseError(source, line_no, "time must be a positive decimal number, got '" + std::string(time_field) + "'");
    }

    if (fields[3] == "0" || fields[3] == "1" || fields[3] == "2") {
      r.status = static_cast<Status>(fields[3][0] - '0');
    } else {
      throw ParseError(source, line_no, "status must be 0, 1 or 2, got '" + std::string(fields[3]) + "'");
    }
    data.push_back(std::move(r));
  }
  if (!have_header) throw ParseError(source, line_no, "empty file (missing header)");
  return data;
}

Dataset read_dataset_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_dataset_csv(in, path);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "id,arm,time,status\n";
  char buf[64];
  for (const auto& r : data) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), r.time);
    out << r.id << ',' << arm_label(r.arm) << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf)) << ','
        << static_cast<int>(r.status) << '\n';
  }
}

}  // namespace crtrial
