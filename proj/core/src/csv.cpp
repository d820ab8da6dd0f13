#include "citcp/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "citcp/errors.hpp"

namespace citcp {

namespace {

constexpr const char* kRequired[5] = {"cycle_id", "commit_timestamp", "test_id",
                                      "duration_s", "verdict"};

[[noreturn]] void fail(const std::string& src, std::size_t line, const std::string& why) {
  throw DataError(src + ":" + std::to_string(line) + ": " + why);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::int64_t parse_i64(const std::string& s, const std::string& src, std::size_t line,
                       const char* what) {
  if (s.empty()) fail(src, line, std::string(what) + " is empty");
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size())
    fail(src, line, std::string(what) + " is not an integer: '" + s + "'");
  return static_cast<std::int64_t>(v);
}

double parse_f64(const std::string& s, const std::string& src, std::size_t line,
                 const char* what) {
  if (s.empty()) fail(src, line, std::string(what) + " is empty");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size())
    fail(src, line, std::string(what) + " is not a number: '" + s + "'");
  if (!std::isfinite(v)) fail(src, line, std::string(what) + " is not finite: '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Subject load_subject(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return load_subject(in, path);
}

Subject load_subject(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) fail(source_name, 1, "empty input, expected header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);
  if (header.size() < 5)
    fail(source_name, lineno, "header must start with cycle_id,commit_timestamp,test_id,duration_s,verdict");
  for (std::size_t i = 0; i < 5; ++i) {
    if (header[i] != kRequired[i])
      fail(source_name, lineno,
           "header column " + std::to_string(i + 1) + " must be '" + kRequired[i] +
               "', got '" + header[i] + "'");
  }

  Subject subject;
  subject.name = subject_name_from_path(source_name);
  subject.feature_names.assign(header.begin() + 5, header.end());
  for (std::size_t i = 0; i < subject.feature_names.size(); ++i) {
    if (subject.feature_names[i].empty())
      fail(source_name, lineno, "feature column " + std::to_string(i + 6) + " has an empty name");
  }
  const std::size_t ncols = header.size();

  // Cycles keyed by id; row order within a cycle is arrival order.
  std::map<std::int64_t, Cycle> cycles;
  bool any_row = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != ncols)
      fail(source_name, lineno,
           "expected " + std::to_string(ncols) + " fields, got " + std::to_string(f.size()));
    const std::int64_t cid = parse_i64(f[0], source_name, lineno, "cycle_id");
    const std::int64_t ts = parse_i64(f[1], source_name, lineno, "commit_timestamp");
    TestRecord rec;
    rec.test_id = f[2];
    if (rec.test_id.empty()) fail(source_name, lineno, "test_id is empty");
    rec.duration_s = parse_f64(f[3], source_name, lineno, "duration_s");
    if (rec.duration_s < 0.0) fail(source_name, lineno, "duration_s is negative");
    if (f[4] == "0")
      rec.verdict = Verdict::pass;
    else if (f[4] == "1")
      rec.verdict = Verdict::fail;
    else
      fail(source_name, lineno, "verdict must be 0 or 1, got '" + f[4] + "'");
    rec.features.reserve(ncols - 5);
    for (std::size_t i = 5; i < ncols; ++i)
      rec.features.push_back(parse_f64(f[i], source_name, lineno, header[i].c_str()));

    auto [it, inserted] = cycles.try_emplace(cid);
    if (inserted) {
      it->second.cycle_id = cid;
      it->second.commit_timestamp = ts;
    } else if (it->second.commit_timestamp != ts) {
      fail(source_name, lineno,
           "cycle " + std::to_string(cid) + " has conflicting commit_timestamp values");
    }
    it->second.records.push_back(std::move(rec));
    any_row = true;
  }
  if (!any_row) fail(source_name, lineno, "no data rows");

  subject.cycles.reserve(cycles.size());
  for (auto& [id, cycle] : cycles) subject.cycles.push_back(std::move(cycle));
  std::stable_sort(subject.cycles.begin(), subject.cycles.end(),
                   [](const Cycle& a, const Cycle& b) {
                     if (a.commit_timestamp != b.commit_timestamp)
                       return a.commit_timestamp < b.commit_timestamp;
                     return a.cycle_id < b.cycle_id;
                   });
  return subject;
}

void write_subject(const Subject& subject, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open file for writing");
  write_subject(subject, out);
  if (!out) throw DataError(path + ": write failed");
}

void write_subject(const Subject& subject, std::ostream& out) {
  out << "cycle_id,commit_timestamp,test_id,duration_s,verdict";
  for (const auto& name : subject.feature_names) out << ',' << name;
  out << '\n';
  for (const auto& c : subject.cycles) {
    for (const auto& r : c.records) {
      out << c.cycle_id << ',' << c.commit_timestamp << ',' << r.test_id << ','
          << format_double(r.duration_s) << ',' << verdict_value(r.verdict);
      for (double v : r.features) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

std::string subject_name_from_path(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string base = (slash == std::string::npos) ? path : path.substr(slash + 1);
  const std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base.empty() ? "subject" : base;
}

TrainTestSplit split_train_test(const Subject& subject, std::size_t train_record_target) {
  if (train_record_target == 0) throw DataError("train record target must be positive");
  TrainTestSplit split;
  split.train_record_target = train_record_target;
  std::size_t cum = 0;
  for (std::size_t i = 0; i < subject.cycles.size(); ++i) {
    cum += subject.cycles[i].records.size();
    if (cum >= train_record_target) {
      split.train_cycle_count = i + 1;
      split.train_record_count = cum;
      break;
    }
  }
  if (split.train_cycle_count == 0)
    throw DataError("subject '" + subject.name + "' has only " + std::to_string(cum) +
                    " records, fewer than the training target of " +
                    std::to_string(train_record_target));
  if (split.train_cycle_count >= subject.cycles.size())
    throw DataError("subject '" + subject.name +
                    "' has no cycles left for testing after a training prefix of " +
                    std::to_string(split.train_cycle_count) + " cycles");
  return split;
}

}  // namespace citcp
