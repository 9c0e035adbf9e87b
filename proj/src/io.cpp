#include "gemfit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "gemfit/error.hpp"

namespace gemfit {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(ErrorCategory::kParse, "line " + std::to_string(line) + ": " + what);
}

// Splits a line into doubles; reports the offending token.
std::vector<double> parse_numbers(const std::string& text, int line) {
  std::vector<double> out;
  std::istringstream tokens(text);
  std::string token;
  while (tokens >> token) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) parse_error(line, "invalid number '" + token + "'");
    out.push_back(v);
  }
  return out;
}

bool is_blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::kIo, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_matrix(std::ostream& out, const Eigen::Ref<const MatX>& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

MatX read_matrix(std::istream& in) {
  std::string line;
  int line_no = 0;
  long rows = -1;
  long cols = -1;
  std::vector<double> values;
  int last_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const std::vector<double> numbers = parse_numbers(line, line_no);
    if (rows < 0) {
      if (numbers.size() != 2 || numbers[0] < 1 || numbers[1] < 1 ||
          numbers[0] != std::floor(numbers[0]) || numbers[1] != std::floor(numbers[1])) {
        parse_error(line_no, "expected header '<rows> <cols>'");
      }
      rows = static_cast<long>(numbers[0]);
      cols = static_cast<long>(numbers[1]);
      continue;
    }
    values.insert(values.end(), numbers.begin(), numbers.end());
    last_line = line_no;
    if (static_cast<long>(values.size()) > rows * cols) {
      parse_error(line_no, "more than " + std::to_string(rows * cols) + " values for a " +
                               std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    }
  }
  if (rows < 0) parse_error(line_no + 1, "missing header '<rows> <cols>'");
  const long expected = rows * cols;
  if (static_cast<long>(values.size()) < expected) {
    parse_error(last_line == 0 ? line_no : last_line,
                "expected " + std::to_string(expected) + " values for a " + std::to_string(rows) +
                    "x" + std::to_string(cols) + " matrix, found " +
                    std::to_string(values.size()) + " (short by " +
                    std::to_string(expected - static_cast<long>(values.size())) + ")");
  }
  MatX m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

void write_matrix_file(const std::string& path, const Eigen::Ref<const MatX>& m) {
  std::ofstream out = open_out(path);
  write_matrix(out, m);
}

MatX read_matrix_file(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_matrix(in);
}

MatX read_matrix_file(const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  MatX m = read_matrix_file(path);
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCategory::kDimension,
                "'" + path + "' holds a " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + " matrix, expected " + std::to_string(rows) +
                    "x" + std::to_string(cols));
  }
  return m;
}

void write_correspondences(std::ostream& out, const CorrespondenceSet& corr) {
  if (corr.truth) {
    out << "# truth";
    const Mat3& r = corr.truth->r.matrix();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out << ' ' << format_double(r(i, j));
    for (int i = 0; i < 3; ++i) out << ' ' << format_double(corr.truth->t(i));
    out << '\n';
  }
  for (const Correspondence& c : corr.pairs) {
    const Vec6 l = c.left.vector();
    const Vec6 r = c.right.vector();
    for (int i = 0; i < 6; ++i) out << (i ? " " : "") << format_double(l(i));
    for (int i = 0; i < 6; ++i) out << ' ' << format_double(r(i));
    out << '\n';
  }
}

CorrespondenceSet read_correspondences(std::istream& in) {
  CorrespondenceSet corr;
  std::string line;
  int line_no = 0;
  auto make_line = [&](const std::vector<double>& v, std::size_t offset, const char* side) {
    const Vec3 d(v[offset], v[offset + 1], v[offset + 2]);
    const Vec3 m(v[offset + 3], v[offset + 4], v[offset + 5]);
    if (!(d.norm() > 0.0)) parse_error(line_no, std::string(side) + " direction is zero");
    if (!(std::abs(d.dot(m)) <= 1e-6)) {
      parse_error(line_no, std::string(side) + " line violates d^T m = 0 (|d^T m| = " +
                               format_double(std::abs(d.dot(m))) + ")");
    }
    return PluckerLine{d, m}.normalized();
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos != std::string::npos && line.compare(pos, 7, "# truth") == 0) {
      const std::vector<double> v = parse_numbers(line.substr(pos + 7), line_no);
      if (v.size() != 12) parse_error(line_no, "truth line needs 12 values");
      Mat3 r;
      r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
      try {
        corr.truth = GroundTruth{RotationMatrix::from_matrix(r, 1e-8), Vec3(v[9], v[10], v[11])};
      } catch (const Error& e) {
        parse_error(line_no, e.what());
      }
      continue;
    }
    if (is_blank_or_comment(line)) continue;
    const std::vector<double> v = parse_numbers(line, line_no);
    if (v.size() != 12) {
      parse_error(line_no, "expected 12 values (dL mL dR mR), found " + std::to_string(v.size()));
    }
    corr.pairs.push_back({make_line(v, 0, "left"), make_line(v, 6, "right")});
  }
  return corr;
}

void write_correspondences_file(const std::string& path, const CorrespondenceSet& corr) {
  std::ofstream out = open_out(path);
  write_correspondences(out, corr);
}

CorrespondenceSet read_correspondences_file(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_correspondences(in);
}

}  // namespace gemfit
