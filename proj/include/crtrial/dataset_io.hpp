#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "crtrial/estimators.hpp"
#include "crtrial/records.hpp"

namespace crtrial {

// Malformed input file; what() carries "<source>:<line>: <reason>".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, long line, const std::string& reason);
  long line() const { return line_; }

 private:
  long line_;
};

// CSV with header `id,arm,time,status`; arm in {T, C}, time > 0 in days,
// status in {0, 1, 2}. Blank lines are skipped; duplicate ids are rejected.
Dataset read_dataset_csv(std::istream& in, const std::string& source = "<input>");
Dataset read_dataset_csv_file(const std::string& path);

void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace crtrial
