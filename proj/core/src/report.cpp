#include "citcp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "citcp/csv.hpp"
#include "citcp/errors.hpp"

namespace citcp {

namespace {

constexpr const char* kPerCycleHeader =
    "subject,technique,protocol,cycle_id,cycle_index,tests,failures,apfd,rapfd,nrpa,"
    "first_fail_time_s,total_time_s,prediction_s,training_s";

constexpr const char* kSummaryHeader =
    "subject,technique,protocol,test_cycles,failing_test_cycles,mean_rapfd,mean_nrpa,ntr,"
    "mean_prediction_s,mean_training_s,avg_commit_interval_s,mean_cycle_duration_s,"
    "fits_commit_interval,worthwhile,worthwhile_ratio,failure_rate,note";

constexpr const char* kApplicabilityHeader =
    "subject,technique,protocol,mean_training_s,mean_prediction_s,avg_commit_interval_s,"
    "mean_cycle_duration_s,fits_commit_interval,worthwhile,worthwhile_ratio,ntr";

// Report CSVs use no quoting, so separators inside free text are replaced.
std::string sanitize_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "";
  return format_double(v);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void fail_at(const std::string& src, std::size_t line, const std::string& why) {
  throw DataError(src + ":" + std::to_string(line) + ": " + why);
}

double parse_field_double(const std::string& s, const std::string& src, std::size_t line,
                          const char* what) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) fail_at(src, line, std::string("bad number for ") + what);
  return v;
}

long long parse_field_int(const std::string& s, const std::string& src, std::size_t line,
                          const char* what) {
  if (s.empty()) fail_at(src, line, std::string("missing integer for ") + what);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) fail_at(src, line, std::string("bad integer for ") + what);
  return v;
}

bool parse_field_bool(const std::string& s, const std::string& src, std::size_t line,
                      const char* what) {
  if (s == "0") return false;
  if (s == "1") return true;
  fail_at(src, line, std::string("bad flag (want 0 or 1) for ") + what);
}

std::string fmt(double v, int precision = 4) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i)
      widths[i] = std::max(widths[i], row[i].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << "  ";
      out << row[i];
      if (i + 1 < row.size())
        out << std::string(widths[i] - row[i].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

void write_per_cycle_csv(const std::vector<CycleRow>& rows, std::ostream& out) {
  out << kPerCycleHeader << '\n';
  for (const CycleRow& r : rows) {
    out << sanitize_field(r.subject) << ',' << sanitize_field(r.technique) << ','
        << sanitize_field(r.protocol) << ',' << r.cycle_id << ',' << r.cycle_index << ','
        << r.tests << ',' << r.failures << ',' << csv_double(r.metrics.apfd) << ','
        << csv_double(r.metrics.rapfd) << ',' << csv_double(r.metrics.nrpa) << ','
        << csv_double(r.metrics.first_fail_time) << ',' << csv_double(r.metrics.total_time)
        << ',' << csv_double(r.prediction_s) << ',' << csv_double(r.training_s) << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const SummaryRow& s : rows) {
    out << sanitize_field(s.subject) << ',' << sanitize_field(s.technique) << ','
        << sanitize_field(s.protocol) << ',' << s.test_cycles << ',' << s.failing_test_cycles
        << ',' << csv_double(s.mean_rapfd) << ',' << csv_double(s.mean_nrpa) << ','
        << csv_double(s.ntr_value) << ',' << csv_double(s.mean_prediction_s) << ','
        << csv_double(s.mean_training_s) << ',' << csv_double(s.avg_commit_interval_s) << ','
        << csv_double(s.mean_cycle_duration_s) << ',' << (s.fits_commit_interval ? 1 : 0)
        << ',' << (s.worthwhile ? 1 : 0) << ',' << csv_double(s.worthwhile_ratio) << ','
        << csv_double(s.failure_rate) << ',' << sanitize_field(s.note) << '\n';
  }
}

void write_applicability_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << kApplicabilityHeader << '\n';
  for (const SummaryRow& s : rows) {
    out << sanitize_field(s.subject) << ',' << sanitize_field(s.technique) << ','
        << sanitize_field(s.protocol) << ',' << csv_double(s.mean_training_s) << ','
        << csv_double(s.mean_prediction_s) << ',' << csv_double(s.avg_commit_interval_s)
        << ',' << csv_double(s.mean_cycle_duration_s) << ','
        << (s.fits_commit_interval ? 1 : 0) << ',' << (s.worthwhile ? 1 : 0) << ','
        << csv_double(s.worthwhile_ratio) << ',' << csv_double(s.ntr_value) << '\n';
  }
}

std::vector<CycleRow> read_per_cycle_csv(std::istream& in, const std::string& src) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(src + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPerCycleHeader) throw DataError(src + ":1: unexpected per-cycle header");

  std::vector<CycleRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != 14) fail_at(src, lineno, "expected 14 fields");
    CycleRow r;
    r.subject = f[0];
    r.technique = f[1];
    r.protocol = f[2];
    r.cycle_id = parse_field_int(f[3], src, lineno, "cycle_id");
    r.cycle_index = static_cast<std::size_t>(parse_field_int(f[4], src, lineno, "cycle_index"));
    r.tests = static_cast<std::size_t>(parse_field_int(f[5], src, lineno, "tests"));
    r.failures = static_cast<int>(parse_field_int(f[6], src, lineno, "failures"));
    r.metrics.apfd = parse_field_double(f[7], src, lineno, "apfd");
    r.metrics.rapfd = parse_field_double(f[8], src, lineno, "rapfd");
    r.metrics.nrpa = parse_field_double(f[9], src, lineno, "nrpa");
    r.metrics.first_fail_time = parse_field_double(f[10], src, lineno, "first_fail_time_s");
    r.metrics.total_time = parse_field_double(f[11], src, lineno, "total_time_s");
    r.prediction_s = parse_field_double(f[12], src, lineno, "prediction_s");
    r.training_s = parse_field_double(f[13], src, lineno, "training_s");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> read_summary_csv(std::istream& in, const std::string& src) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(src + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSummaryHeader) throw DataError(src + ":1: unexpected summary header");

  std::vector<SummaryRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != 17) fail_at(src, lineno, "expected 17 fields");
    SummaryRow s;
    s.subject = f[0];
    s.technique = f[1];
    s.protocol = f[2];
    s.test_cycles = static_cast<std::size_t>(parse_field_int(f[3], src, lineno, "test_cycles"));
    s.failing_test_cycles =
        static_cast<std::size_t>(parse_field_int(f[4], src, lineno, "failing_test_cycles"));
    s.mean_rapfd = parse_field_double(f[5], src, lineno, "mean_rapfd");
    s.mean_nrpa = parse_field_double(f[6], src, lineno, "mean_nrpa");
    s.ntr_value = parse_field_double(f[7], src, lineno, "ntr");
    s.mean_prediction_s = parse_field_double(f[8], src, lineno, "mean_prediction_s");
    s.mean_training_s = parse_field_double(f[9], src, lineno, "mean_training_s");
    s.avg_commit_interval_s =
        parse_field_double(f[10], src, lineno, "avg_commit_interval_s");
    s.mean_cycle_duration_s =
        parse_field_double(f[11], src, lineno, "mean_cycle_duration_s");
    s.fits_commit_interval = parse_field_bool(f[12], src, lineno, "fits_commit_interval");
    s.worthwhile = parse_field_bool(f[13], src, lineno, "worthwhile");
    s.worthwhile_ratio = parse_field_double(f[14], src, lineno, "worthwhile_ratio");
    s.failure_rate = parse_field_double(f[15], src, lineno, "failure_rate");
    s.note = f[16];
    rows.push_back(std::move(s));
  }
  return rows;
}

std::vector<CycleRow> read_per_cycle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_per_cycle_csv(in, path);
}

std::vector<SummaryRow> read_summary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_summary_csv(in, path);
}

OutcomeMatrix failing_cycle_matrix(const std::vector<CycleRow>& rows) {
  std::set<std::string> tech_set;
  for (const CycleRow& r : rows) tech_set.insert(r.technique);

  OutcomeMatrix m;
  m.techniques.assign(tech_set.begin(), tech_set.end());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m.techniques.size(); ++i) index[m.techniques[i]] = i;

  using BlockKey = std::tuple<std::string, std::string, std::size_t>;
  std::map<BlockKey, std::vector<double>> blocks;
  std::map<BlockKey, std::size_t> filled;
  for (const CycleRow& r : rows) {
    if (r.failures <= 0) continue;
    const BlockKey key{r.subject, r.protocol, r.cycle_index};
    auto [it, inserted] = blocks.try_emplace(
        key, m.techniques.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double>& scores = it->second;
    const std::size_t col = index[r.technique];
    if (std::isnan(scores[col])) ++filled[key];
    scores[col] = r.metrics.rapfd;
  }
  for (const auto& [key, scores] : blocks) {
    if (filled[key] == m.techniques.size()) m.scores.push_back(scores);
  }
  return m;
}

std::string friedman_report(const OutcomeMatrix& m) {
  const FriedmanResult fr = friedman_iman_davenport(m.scores);
  const MeanRankTable ranks = mean_rank_table(m.techniques, m.scores);
  const std::vector<SignTestEntry> signs = pairwise_sign_tests(m.techniques, m.scores);

  std::ostringstream out;
  out << "technique rank comparison over " << fr.n_outcomes << " failing cycles, "
      << fr.n_techniques << " techniques\n";
  out << "friedman chi2_f = " << fmt(fr.chi2_f, 6) << '\n';
  out << "iman-davenport f_id = " << fmt(fr.f_id, 6) << "\n\n";

  std::vector<std::vector<std::string>> rank_rows{{"technique", "mean_rank"}};
  for (const MeanRankEntry& e : ranks.entries)
    rank_rows.push_back({e.technique, fmt(e.mean_rank)});
  out << "mean ranks (1 = best)\n" << render_table(rank_rows) << '\n';

  std::vector<std::vector<std::string>> diff_rows{{"pair", "rank_difference"}};
  for (const MeanRankDifference& d : ranks.differences)
    diff_rows.push_back({d.technique_a + " vs " + d.technique_b, fmt(d.rank_difference)});
  out << "pairwise mean-rank differences\n" << render_table(diff_rows) << '\n';

  std::vector<std::vector<std::string>> sign_rows{
      {"pair", "wins_a", "wins_b", "p", "p_holm"}};
  for (const SignTestEntry& e : signs)
    sign_rows.push_back({e.technique_a + " vs " + e.technique_b, std::to_string(e.wins_a),
                         std::to_string(e.wins_b), fmt(e.p_value, 6),
                         fmt(e.holm_adjusted_p, 6)});
  out << "holm-adjusted exact sign tests\n" << render_table(sign_rows);
  return out.str();
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::vector<std::vector<std::string>> table{{"subject", "technique", "protocol", "cycles",
                                               "failing", "mean_rapfd", "mean_nrpa", "ntr",
                                               "note"}};
  for (const SummaryRow& s : rows)
    table.push_back({s.subject, s.technique, s.protocol, std::to_string(s.test_cycles),
                     std::to_string(s.failing_test_cycles), fmt(s.mean_rapfd),
                     fmt(s.mean_nrpa), fmt(s.ntr_value), s.note});
  return render_table(table);
}

std::string applicability_table(const std::vector<SummaryRow>& rows) {
  std::vector<std::vector<std::string>> table{
      {"subject", "technique", "protocol", "train_s", "predict_s", "commit_interval_s",
       "cycle_duration_s", "fits_interval", "worthwhile", "worthwhile_ratio"}};
  for (const SummaryRow& s : rows)
    table.push_back({s.subject, s.technique, s.protocol, fmt(s.mean_training_s, 6),
                     fmt(s.mean_prediction_s, 6), fmt(s.avg_commit_interval_s, 2),
                     fmt(s.mean_cycle_duration_s, 2), s.fits_commit_interval ? "yes" : "no",
                     s.worthwhile ? "yes" : "no", fmt(s.worthwhile_ratio)});
  return render_table(table);
}

namespace {

// subject -> technique -> value for one protocol and one summary column.
std::string grid_for(const std::vector<const SummaryRow*>& rows,
                     const std::vector<std::string>& techniques, bool use_ntr) {
  std::map<std::string, std::map<std::string, double>> cells;
  for (const SummaryRow* s : rows)
    cells[s->subject][s->technique] = use_ntr ? s->ntr_value : s->mean_rapfd;

  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"subject"};
  header.insert(header.end(), techniques.begin(), techniques.end());
  table.push_back(header);

  std::vector<double> col_sum(techniques.size(), 0.0);
  std::vector<std::size_t> col_n(techniques.size(), 0);
  for (const auto& [subject, by_tech] : cells) {
    std::vector<std::string> row{subject};
    for (std::size_t t = 0; t < techniques.size(); ++t) {
      const auto it = by_tech.find(techniques[t]);
      const double v =
          it == by_tech.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
      row.push_back(fmt(v));
      if (!std::isnan(v)) {
        col_sum[t] += v;
        ++col_n[t];
      }
    }
    table.push_back(std::move(row));
  }
  std::vector<std::string> mean_row{"(mean)"};
  for (std::size_t t = 0; t < techniques.size(); ++t)
    mean_row.push_back(col_n[t] ? fmt(col_sum[t] / static_cast<double>(col_n[t]))
                                : fmt(std::numeric_limits<double>::quiet_NaN()));
  table.push_back(std::move(mean_row));
  return render_table(table);
}

}  // namespace

std::string compare_report(const std::vector<CycleRow>& rows,
                           const std::vector<SummaryRow>& summaries) {
  std::set<std::string> tech_set, protocol_set;
  for (const SummaryRow& s : summaries) {
    tech_set.insert(s.technique);
    protocol_set.insert(s.protocol);
  }
  const std::vector<std::string> techniques(tech_set.begin(), tech_set.end());

  std::ostringstream out;
  for (const std::string& protocol : protocol_set) {
    std::vector<const SummaryRow*> more, less;
    for (const SummaryRow& s : summaries) {
      if (s.protocol != protocol) continue;
      (is_more_failure(s.failure_rate) ? more : less).push_back(&s);
    }
    out << "== protocol " << protocol << " ==\n";
    if (!more.empty()) {
      out << "mean rAPFD, subjects with failure rate > 1%\n"
          << grid_for(more, techniques, false) << '\n';
      out << "NTR, subjects with failure rate > 1%\n"
          << grid_for(more, techniques, true) << '\n';
    }
    if (!less.empty()) {
      out << "mean rAPFD, subjects with failure rate <= 1%\n"
          << grid_for(less, techniques, false) << '\n';
      out << "NTR, subjects with failure rate <= 1%\n"
          << grid_for(less, techniques, true) << '\n';
    }
  }

  if (protocol_set.size() > 1) {
    const std::vector<std::string> protocols(protocol_set.begin(), protocol_set.end());
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> cells;
    for (const SummaryRow& s : summaries)
      cells[s.subject][s.technique][s.protocol] = s.mean_rapfd;
    out << "== mean rAPFD by protocol ==\n";
    for (const auto& [subject, by_tech] : cells) {
      std::vector<std::vector<std::string>> table;
      std::vector<std::string> header{"technique"};
      header.insert(header.end(), protocols.begin(), protocols.end());
      for (std::size_t p = 1; p < protocols.size(); ++p)
        header.push_back(protocols[p] + "-" + protocols[0]);
      table.push_back(header);
      for (const auto& [technique, by_protocol] : by_tech) {
        std::vector<std::string> row{technique};
        std::vector<double> vals(protocols.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t p = 0; p < protocols.size(); ++p) {
          const auto it = by_protocol.find(protocols[p]);
          if (it != by_protocol.end()) vals[p] = it->second;
          row.push_back(fmt(vals[p]));
        }
        for (std::size_t p = 1; p < protocols.size(); ++p) row.push_back(fmt(vals[p] - vals[0]));
        table.push_back(std::move(row));
      }
      out << "subject " << subject << '\n' << render_table(table) << '\n';
    }
  }

  out << "== rank statistics ==\n" << friedman_report(failing_cycle_matrix(rows));
  return out.str();
}

void write_run_outputs(const RunResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto to_file = [&](const char* name, const std::string& body) {
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << body;
  };

  {
    std::ostringstream body;
    write_per_cycle_csv(result.per_cycle, body);
    to_file("per_cycle.csv", body.str());
  }
  {
    std::ostringstream body;
    write_summary_csv(result.summary, body);
    to_file("summary.csv", body.str());
  }
  {
    std::ostringstream body;
    write_applicability_csv(result.summary, body);
    to_file("applicability.csv", body.str());
  }
  std::string friedman;
  try {
    friedman = friedman_report(failing_cycle_matrix(result.per_cycle));
  } catch (const ConfigError& e) {
    friedman = std::string("rank comparison unavailable: ") + e.what() + "\n";
  }
  to_file("friedman.txt", friedman);
}

}  // namespace citcp
