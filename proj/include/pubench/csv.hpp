#pragma once

// CSV files.
//
//   labeled: f0,...,f{d-1},label              label in {+1,-1}
//   PU:      f0,...,f{d-1},observed,oracle_label
//            observed in {P,U}, oracle_label in {+1,-1,NA}
//
// Numbers are written in shortest round-trip form, so load(save(x)) == x.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pubench/data.hpp"
#include "pubench/error.hpp"

namespace pubench::csv {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline double parse_double(std::string_view field, const std::string& path, std::size_t row,
                           std::size_t col) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && field.front() == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || field.empty()) {
    throw ParseError(path, row, col, "not a number: '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(path, row, col, "non-finite value");
  return v;
}

inline int parse_label(std::string_view field, const std::string& path, std::size_t row,
                       std::size_t col) {
  if (field == "+1") return 1;
  if (field == "-1") return -1;
  throw ParseError(path, row, col, "unknown label token '" + std::string(field) + "'");
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::size_t check_header(const std::vector<std::string>& lines, const std::string& path,
                                std::vector<std::string_view> trailer) {
  if (lines.empty()) throw ParseError(path, 1, 1, "missing header");
  const auto header = split_fields(lines[0]);
  if (header.size() < trailer.size() + 1) {
    throw ParseError(path, 1, 1, "header needs at least one feature column");
  }
  const std::size_t d = header.size() - trailer.size();
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      throw ParseError(path, 1, j + 1, "expected column 'f" + std::to_string(j) + "', got '" +
                                           std::string(header[j]) + "'");
    }
  }
  for (std::size_t k = 0; k < trailer.size(); ++k) {
    if (header[d + k] != trailer[k]) {
      throw ParseError(path, 1, d + k + 1, "expected column '" + std::string(trailer[k]) + "'");
    }
  }
  return d;
}

inline void write_header(std::ostream& out, std::size_t d, std::string_view trailer) {
  for (std::size_t j = 0; j < d; ++j) out << 'f' << j << ',';
  out << trailer << '\n';
}

inline void write_row(std::ostream& out, std::span<const double> row) {
  for (double v : row) out << format_double(v) << ',';
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace detail

inline void save_labeled(const LabeledDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  detail::write_header(out, ds.dim(), "label");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    detail::write_row(out, ds.features.row(i));
    out << (ds.labels[i] > 0 ? "+1" : "-1") << '\n';
  }
  detail::finish(out, path);
}

inline LabeledDataset load_labeled(const std::string& path) {
  const auto lines = detail::read_lines(path);
  const std::size_t d = detail::check_header(lines, path, {"label"});
  LabeledDataset ds;
  ds.features.reshape_empty(d);
  Vector row(d);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = detail::split_fields(lines[r]);
    if (fields.size() != d + 1) {
      throw ParseError(path, r + 1, 1, "expected " + std::to_string(d + 1) + " fields, got " +
                                           std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) row[j] = detail::parse_double(fields[j], path, r + 1, j + 1);
    ds.features.append_row(row);
    ds.labels.push_back(detail::parse_label(fields[d], path, r + 1, d + 1));
  }
  if (ds.size() == 0) throw ParseError(path, 2, 1, "no data rows");
  return ds;
}

inline void save_pu(const PuDataset& pu, const std::string& path) {
  pu.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  detail::write_header(out, pu.dim(), "observed,oracle_label");
  for (std::size_t i = 0; i < pu.n_positive(); ++i) {
    detail::write_row(out, pu.positives.row(i));
    out << "P,+1\n";
  }
  for (std::size_t i = 0; i < pu.n_unlabeled(); ++i) {
    detail::write_row(out, pu.unlabeled.row(i));
    out << "U,";
    if (pu.oracle_unlabeled_labels) {
      out << ((*pu.oracle_unlabeled_labels)[i] > 0 ? "+1" : "-1");
    } else {
      out << "NA";
    }
    out << '\n';
  }
  detail::finish(out, path);
}

// Setting, prior and label frequency are not stored in the file. Oracle
// labels of U must be either all present or all NA.
inline PuDataset load_pu(const std::string& path, Setting setting, double prior,
                         std::optional<double> label_frequency = std::nullopt) {
  const auto lines = detail::read_lines(path);
  const std::size_t d = detail::check_header(lines, path, {"observed", "oracle_label"});
  PuDataset pu;
  pu.setting = setting;
  pu.prior = prior;
  pu.label_frequency = label_frequency;
  pu.positives.reshape_empty(d);
  pu.unlabeled.reshape_empty(d);
  std::vector<int> oracle;
  std::size_t na_count = 0;
  Vector row(d);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = detail::split_fields(lines[r]);
    if (fields.size() != d + 2) {
      throw ParseError(path, r + 1, 1, "expected " + std::to_string(d + 2) + " fields, got " +
                                           std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) row[j] = detail::parse_double(fields[j], path, r + 1, j + 1);
    const std::string_view observed = fields[d];
    const std::string_view oracle_tok = fields[d + 1];
    if (observed == "P") {
      if (oracle_tok != "NA" && detail::parse_label(oracle_tok, path, r + 1, d + 2) != 1) {
        throw ParseError(path, r + 1, d + 2, "observed positive with oracle label -1");
      }
      pu.positives.append_row(row);
    } else if (observed == "U") {
      pu.unlabeled.append_row(row);
      if (oracle_tok == "NA") {
        ++na_count;
      } else {
        oracle.push_back(detail::parse_label(oracle_tok, path, r + 1, d + 2));
      }
    } else {
      throw ParseError(path, r + 1, d + 1, "observed must be P or U, got '" +
                                               std::string(observed) + "'");
    }
  }
  if (na_count != 0 && !oracle.empty()) {
    throw ParseError(path, 1, d + 2, "oracle labels must be given for all U rows or none");
  }
  if (na_count == 0) pu.oracle_unlabeled_labels = std::move(oracle);
  pu.validate();
  return pu;
}

}  // namespace pubench::csv
