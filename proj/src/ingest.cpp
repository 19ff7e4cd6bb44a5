#include "stepfda/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace stepfda::ingest {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string epoch_column(Index t) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "t%04lld", static_cast<long long>(t));
  return buf;
}

std::int64_t parse_count(const std::string& cell, std::size_t line_no,
                         const std::string& column) {
  if (cell.empty()) {
    throw ValidationError("line " + std::to_string(line_no) + ", column " + column +
                          ": blank cell (missing values are not imputed)");
  }
  std::int64_t value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("line " + std::to_string(line_no) + ", column " + column +
                          ": '" + cell + "' is not an integer step count");
  }
  if (value < 0) {
    throw ValidationError("line " + std::to_string(line_no) + ", column " + column +
                          ": negative count " + cell);
  }
  return value;
}

}  // namespace

Vector StepDay::to_curve() const {
  Vector v(t());
  for (Index i = 0; i < t(); ++i) v[i] = static_cast<Scalar>(counts[static_cast<std::size_t>(i)]);
  return v;
}

Matrix DayMatrix::to_curves() const {
  Matrix m(n(), t());
  for (Index i = 0; i < n(); ++i) m.row(i) = days[static_cast<std::size_t>(i)].to_curve().transpose();
  return m;
}

std::vector<std::string> DayMatrix::day_ids() const {
  std::vector<std::string> ids;
  ids.reserve(days.size());
  for (const auto& d : days) ids.push_back(d.day_id);
  return ids;
}

std::vector<std::string> DayMatrix::subject_ids() const {
  std::vector<std::string> ids;
  ids.reserve(days.size());
  for (const auto& d : days) ids.push_back(d.subject_id);
  return ids;
}

void validate(const DayMatrix& dm) {
  if (dm.days.empty()) throw ValidationError("day matrix is empty");
  const Index t = dm.t();
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < dm.days.size(); ++i) {
    const StepDay& d = dm.days[i];
    if (d.t() != t) {
      throw ValidationError("day '" + d.day_id + "' has " + std::to_string(d.t()) +
                            " epochs, expected " + std::to_string(t));
    }
    if (!seen.insert(d.day_id).second) {
      throw ValidationError("duplicate day_id '" + d.day_id + "'");
    }
    for (std::int64_t c : d.counts) {
      if (c < 0) throw ValidationError("day '" + d.day_id + "' has a negative count");
    }
  }
}

DayMatrix read_day_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");

  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "day_id" || header[1] != "subject_id") {
    throw ParseError(path.string() + ": header must start with day_id,subject_id,t0001,...");
  }
  const std::size_t t = header.size() - 2;
  for (std::size_t j = 0; j < t; ++j) {
    if (header[j + 2] != epoch_column(static_cast<Index>(j + 1))) {
      throw ParseError(path.string() + ": column " + std::to_string(j + 3) +
                       " is '" + header[j + 2] + "', expected '" +
                       epoch_column(static_cast<Index>(j + 1)) + "'");
    }
  }

  DayMatrix dm;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;  // tolerate a trailing blank line
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": " +
                       std::to_string(cells.size()) + " columns, expected " +
                       std::to_string(header.size()));
    }
    StepDay day;
    day.day_id = cells[0];
    day.subject_id = cells[1];
    day.counts.reserve(t);
    for (std::size_t j = 0; j < t; ++j) {
      day.counts.push_back(parse_count(cells[j + 2], line_no, header[j + 2]));
    }
    dm.days.push_back(std::move(day));
  }

  validate(dm);
  return dm;
}

void write_day_matrix(const DayMatrix& dm, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "day_id,subject_id";
  for (Index j = 1; j <= dm.t(); ++j) out << ',' << epoch_column(j);
  out << '\n';
  for (const auto& d : dm.days) {
    out << d.day_id << ',' << d.subject_id;
    for (std::int64_t c : d.counts) out << ',' << c;
    out << '\n';
  }
}

void validate_grid(Index t, int q2) {
  if (q2 < 1) throw ConfigError("q2 must be >= 1, got " + std::to_string(q2));
  if (t % q2 != 0) {
    throw ConfigError("grid length T=" + std::to_string(t) +
                      " is not divisible by q2=" + std::to_string(q2));
  }
}

void validate_grid(const DayMatrix& dm, int q2) { validate_grid(dm.t(), q2); }

DayMatrix from_integer_curves(const Matrix& curves,
                              const std::vector<std::string>& day_ids) {
  if (static_cast<Index>(day_ids.size()) != curves.rows()) {
    throw ValidationError("day_ids length does not match curve count");
  }
  DayMatrix dm;
  dm.days.resize(static_cast<std::size_t>(curves.rows()));
  for (Index i = 0; i < curves.rows(); ++i) {
    StepDay& d = dm.days[static_cast<std::size_t>(i)];
    d.day_id = day_ids[static_cast<std::size_t>(i)];
    d.counts.resize(static_cast<std::size_t>(curves.cols()));
    for (Index j = 0; j < curves.cols(); ++j) {
      const Scalar v = curves(i, j);
      const auto r = std::llround(v);
      if (v < 0 || std::abs(v - static_cast<Scalar>(r)) > 1e-9) {
        throw ValidationError("curve " + d.day_id + " has a non-integer value");
      }
      d.counts[static_cast<std::size_t>(j)] = r;
    }
  }
  validate(dm);
  return dm;
}

}  // namespace stepfda::ingest
