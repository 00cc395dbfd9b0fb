#include "nykrls/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace nykrls {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, long line, std::size_t column) {
  const std::string_view t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw DataError("line " + std::to_string(line) + ", field " +
                    std::to_string(column + 1) + ": not a number: '" +
                    std::string(field) + "'");
  if (!std::isfinite(value))
    throw DataError("line " + std::to_string(line) + ", field " +
                    std::to_string(column + 1) + ": non-finite value");
  return value;
}

std::vector<std::string_view> split_line(const std::string& line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  const std::string_view sv(line);
  for (;;) {
    const std::size_t pos = sv.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(sv.substr(start));
      break;
    }
    fields.push_back(sv.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && schema.header) continue;
    if (trim(line).empty()) continue;
    const auto fields = split_line(line, schema.delimiter);
    if (width == 0) {
      width = fields.size();
      if (width < 2)
        throw DataError("line " + std::to_string(line_no) +
                        ": need at least two fields (features and target)");
    } else if (fields.size() != width) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j)
      row[j] = parse_field(fields[j], line_no, j);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("'" + path + "': no data rows");
  const int w = static_cast<int>(width);
  int target = schema.target_column < 0 ? w - 1 : schema.target_column;
  if (target < 0 || target >= w)
    throw DataError("target column " + std::to_string(schema.target_column) +
                    " out of range for " + std::to_string(w) + " fields");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  Dataset data;
  data.x.resize(n, w - 1);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    for (int j = 0; j < w; ++j) {
      if (j == target)
        data.y(i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      else
        data.x(i, c++) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return data;
}

void write_csv(const Dataset& data, const std::string& path, const CsvSchema& schema) {
  if (data.x.rows() != data.y.size())
    throw InputError("write_csv: feature/target row mismatch");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  const int w = static_cast<int>(data.x.cols()) + 1;
  const int target = schema.target_column < 0 ? w - 1 : schema.target_column;
  if (target < 0 || target >= w)
    throw InputError("write_csv: target column out of range");
  char buf[40];
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    Eigen::Index c = 0;
    for (int j = 0; j < w; ++j) {
      const double v = (j == target) ? data.y(i) : data.x(i, c++);
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (j > 0) out << schema.delimiter;
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.rows() < 1) throw InputError("standardizer: empty matrix");
  Standardizer s;
  s.mean_ = x.colwise().mean();
  Eigen::RowVectorXd var =
      (x.rowwise() - s.mean_).array().square().colwise().mean();
  s.scale_ = var.array().sqrt();
  for (Eigen::Index j = 0; j < s.scale_.size(); ++j)
    if (!(s.scale_(j) > 0.0)) s.scale_(j) = 1.0;  // constant feature
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != mean_.size())
    throw InputError("standardizer: dimension mismatch");
  return (x.rowwise() - mean_).array().rowwise() / scale_.array();
}

}  // namespace nykrls
