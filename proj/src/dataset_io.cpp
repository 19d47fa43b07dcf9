#include "rpmx/dataset_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "rpmx/errors.hpp"

namespace rpmx {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

bool parse_cell(const std::string& s, double& out) {
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) return false;
  out = x;
  return true;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset load_dataset(const std::string& path, const DataSchema& schema,
                     LoadReport* report) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw config_error({"cannot open dataset " + path});

  std::string line;
  if (!std::getline(is, line)) throw config_error({"dataset " + path + " is empty"});
  std::vector<std::string> header = split_csv(line);

  std::vector<std::string> errors;
  std::set<std::string> seen;
  for (const auto& name : header) {
    if (name.empty()) errors.push_back("dataset has an empty column name");
    if (!seen.insert(name).second)
      errors.push_back("dataset has a duplicate column '" + name + "'");
  }
  auto resp_it = std::find(header.begin(), header.end(), schema.response);
  if (resp_it == header.end())
    errors.push_back("dataset is missing the response column '" +
                     schema.response + "'");
  for (const auto& name : schema.binary_columns)
    if (!seen.count(name))
      errors.push_back("binary_columns names a missing column '" + name + "'");
  for (const auto& rule : schema.discretize) {
    if (!seen.count(rule.column))
      errors.push_back("discretize names a missing column '" + rule.column + "'");
    if (rule.column == schema.response)
      errors.push_back("discretize cannot target the response column");
  }
  if (!errors.empty()) throw config_error(errors);

  std::size_t resp_idx =
      static_cast<std::size_t>(resp_it - header.begin());

  // Parse all rows first; drop the gappy ones.
  std::vector<std::vector<double>> rows;
  std::vector<int> row_ids;  // 1-based position in the file's data section
  int dropped = 0;
  int data_row = 0;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    ++data_row;
    std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size()) {
      errors.push_back("row " + std::to_string(data_row) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
      continue;
    }
    if (std::any_of(cells.begin(), cells.end(),
                    [](const std::string& c) { return c.empty(); })) {
      ++dropped;
      continue;
    }
    std::vector<double> vals(cells.size());
    bool ok = true;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_cell(cells[j], vals[j])) {
        errors.push_back("row " + std::to_string(data_row) + ", column '" +
                         header[j] + "': non-numeric cell '" + cells[j] + "'");
        ok = false;
      }
    }
    if (ok) {
      rows.push_back(std::move(vals));
      row_ids.push_back(data_row);
    }
  }
  if (!errors.empty()) throw config_error(errors);
  if (rows.empty()) throw config_error({"dataset " + path + " has no usable rows"});
  if (report) report->dropped_rows = dropped;

  // Assemble covariate columns in header order, expanding discretize rules.
  Dataset data;
  data.response_name = schema.response;
  data.y.reserve(rows.size());
  for (const auto& r : rows) data.y.push_back(r[resp_idx]);

  std::vector<std::vector<double>> cols;  // column-major covariates
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j == resp_idx) continue;
    const std::string& name = header[j];
    auto rule = std::find_if(schema.discretize.begin(), schema.discretize.end(),
                             [&](const DiscretizeRule& r) { return r.column == name; });
    if (rule != schema.discretize.end()) {
      for (std::size_t c = 0; c < rule->cutoffs.size(); ++c) {
        std::vector<double> col(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
          col[i] = rows[i][j] > rule->cutoffs[c] ? 1.0 : 0.0;
        data.names.push_back(name + "_gt" + std::to_string(c + 1));
        data.types.push_back(ColumnType::Binary);
        cols.push_back(std::move(col));
      }
      continue;
    }
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][j];
    bool forced_binary = std::find(schema.binary_columns.begin(),
                                   schema.binary_columns.end(),
                                   name) != schema.binary_columns.end();
    bool all01 = std::all_of(col.begin(), col.end(),
                             [](double v) { return v == 0.0 || v == 1.0; });
    if (forced_binary && !all01) {
      for (std::size_t i = 0; i < col.size(); ++i)
        if (col[i] != 0.0 && col[i] != 1.0) {
          errors.push_back("row " + std::to_string(row_ids[i]) + ", column '" +
                           name + "': binary column holds " + fmt(col[i]));
          break;
        }
      continue;
    }
    data.names.push_back(name);
    data.types.push_back((forced_binary || all01) ? ColumnType::Binary
                                                  : ColumnType::Continuous);
    cols.push_back(std::move(col));
  }
  if (!errors.empty()) throw config_error(errors);
  if (cols.empty()) throw config_error({"dataset " + path + " has no covariates"});

  data.x = Matrix<double>(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) data.x(i, j) = cols[j][i];
  return data;
}

void save_dataset(const std::string& path, const Dataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write dataset " + path);
  os << data.response_name;
  for (const auto& name : data.names) os << ',' << name;
  os << '\n';
  for (int i = 0; i < data.n(); ++i) {
    auto ii = static_cast<std::size_t>(i);
    os << fmt(data.y[ii]);
    for (int j = 0; j < data.d(); ++j)
      os << ',' << fmt(data.x(ii, static_cast<std::size_t>(j)));
    os << '\n';
  }
}

}  // namespace rpmx
