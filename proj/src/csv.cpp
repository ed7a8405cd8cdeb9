#include "rectex/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rectex {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  // strtod instead of stod: stod throws on the ERANGE that subnormal
  // results set, which would reject values the writers legitimately emit.
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  const bool overflow = errno == ERANGE && std::abs(v) == HUGE_VAL;
  if (s.empty() || end != s.c_str() + s.size() || overflow) {
    throw std::invalid_argument(context + ": bad numeric field '" + s + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void save_matrix_csv(const std::string& path, const Matrix& m,
                     const std::string& column_prefix) {
  std::ofstream out = open_out(path);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    out << (c ? "," : "") << column_prefix << (c + 1);
  }
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out << (c ? "," : "") << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix load_matrix_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 2) throw std::invalid_argument("matrix csv " + path + ": missing header or rows");
  const std::size_t cols = split_line(lines[0]).size();
  Matrix m(lines.size() - 1, cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> fields = split_line(lines[r]);
    if (fields.size() != cols) {
      throw std::invalid_argument("matrix csv " + path + ": ragged row " + std::to_string(r + 1));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(r - 1, c) = parse_double(fields[c], "matrix csv " + path);
    }
  }
  return m;
}

void save_dataset_csv(const std::string& path, const Dataset& data) {
  data.validate();
  std::ofstream out = open_out(path);
  out << "d";
  for (std::size_t j = 1; j <= data.dim; ++j) out << ",x_" << j;
  out << ",label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.dim;
    for (double v : data.points[i]) out << ',' << format_double(v);
    out << ',' << data.labels[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::invalid_argument("dataset csv " + path + ": empty file");
  const std::size_t header_fields = split_line(lines[0]).size();
  if (header_fields < 3) throw std::invalid_argument("dataset csv " + path + ": bad header");
  const std::size_t dim = header_fields - 2;

  Dataset data;
  data.dim = dim;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> fields = split_line(lines[r]);
    if (fields.size() != header_fields) {
      throw std::invalid_argument("dataset csv " + path + ": ragged row " + std::to_string(r + 1));
    }
    if (parse_double(fields[0], "dataset csv") != static_cast<double>(dim)) {
      throw std::invalid_argument("dataset csv " + path + ": dimension column mismatch");
    }
    std::vector<double> x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = parse_double(fields[1 + j], "dataset csv");
    const double label = parse_double(fields.back(), "dataset csv");
    if (label != 1.0 && label != -1.0) {
      throw std::invalid_argument("dataset csv " + path + ": label must be +1 or -1");
    }
    data.points.push_back(std::move(x));
    data.labels.push_back(label > 0 ? 1 : -1);
  }
  data.validate();
  return data;
}

void save_report_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
  std::ofstream out = open_out(path);
  out << "n,d,setting,train_error,test_error,chosen_lr,epochs\n";
  for (const ExperimentRow& row : rows) {
    out << row.n << ',' << row.d << ',' << row.setting << ','
        << format_double(row.train_error) << ',' << format_double(row.test_error) << ','
        << format_double(row.chosen_lr) << ',' << row.epochs << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ExperimentRow> load_report_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::invalid_argument("report csv " + path + ": empty file");
  std::vector<ExperimentRow> rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> f = split_line(lines[r]);
    if (f.size() != 7) {
      throw std::invalid_argument("report csv " + path + ": ragged row " + std::to_string(r + 1));
    }
    ExperimentRow row;
    row.n = static_cast<std::size_t>(parse_double(f[0], "report csv"));
    row.d = static_cast<std::size_t>(parse_double(f[1], "report csv"));
    row.setting = f[2];
    row.train_error = parse_double(f[3], "report csv");
    row.test_error = parse_double(f[4], "report csv");
    row.chosen_lr = parse_double(f[5], "report csv");
    row.epochs = static_cast<std::size_t>(parse_double(f[6], "report csv"));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rectex
