#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "citcp/subject.hpp"

namespace citcp {

// The dataset format is a CSV with the fixed header prefix
//   cycle_id,commit_timestamp,test_id,duration_s,verdict
// optionally followed by numeric feature columns. Rows belonging to one
// cycle_id must agree on commit_timestamp. Cycles are returned sorted by
// (commit_timestamp, cycle_id); row order within a cycle is preserved.
// Malformed input throws DataError with "<source>:<line>: <reason>".
Subject load_subject(const std::string& path);
Subject load_subject(std::istream& in, const std::string& source_name);

// Inverse of load_subject: doubles are written with enough digits to
// round-trip exactly, so load(write(s)) == s.
void write_subject(const Subject& subject, const std::string& path);
void write_subject(const Subject& subject, std::ostream& out);

// File stem without directory or extension; used as the subject name.
std::string subject_name_from_path(const std::string& path);

// Chronological split: training set is the shortest cycle prefix whose
// cumulative record count reaches train_record_target. Cycles are never
// split. Throws DataError if either side would be empty.
struct TrainTestSplit {
  std::size_t train_cycle_count = 0;   // cycles [0, train_cycle_count) train
  std::size_t train_record_count = 0;
  std::size_t train_record_target = 0;
};

TrainTestSplit split_train_test(const Subject& subject, std::size_t train_record_target);

// %.17g, the round-trip-exact rendering used in every CSV this tool writes.
std::string format_double(double v);

}  // namespace citcp
