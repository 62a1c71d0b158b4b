#include "wcm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace wcm {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const Mat<double>& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_csv(const std::string& path, const Mat<double>& m) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_csv(out, m);
}

Mat<double> read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError("csv: cannot parse '" + cell + "' on row " +
                          std::to_string(rows.size() + 1));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("csv: row " + std::to_string(rows.size() + 1) + " has " +
                        std::to_string(row.size()) + " columns, expected " +
                        std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  const Index n_rows = static_cast<Index>(rows.size());
  const Index n_cols = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Mat<double> m(n_rows, n_cols);
  for (Index r = 0; r < n_rows; ++r) {
    for (Index c = 0; c < n_cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Mat<double> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return read_csv(in);
}

nlohmann::json matrix_to_json(const Mat<double>& m, const std::optional<BlockStructure>& s) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  if (s) j["block_sizes"] = s->sizes();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

MatrixFile matrix_from_json(const nlohmann::json& j) {
  try {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols) {
      throw FormatError("matrix json: data length does not equal rows*cols");
    }
    MatrixFile out;
    out.matrix.resize(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) out.matrix(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    if (j.contains("block_sizes") && !j["block_sizes"].is_null()) {
      out.structure = BlockStructure(j["block_sizes"].get<std::vector<Index>>());
    }
    return out;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("matrix json: ") + ex.what());
  }
}

namespace {

bool has_json_extension(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

}  // namespace

MatrixFile read_matrix_file(const std::string& path) {
  if (!has_json_extension(path)) {
    return MatrixFile{read_csv(path), std::nullopt};
  }
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(path + ": " + ex.what());
  }
  return matrix_from_json(j);
}

void write_matrix_file(const std::string& path, const Mat<double>& m,
                       const std::optional<BlockStructure>& s) {
  if (!has_json_extension(path)) {
    write_csv(path, m);
    return;
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << matrix_to_json(m, s).dump() << '\n';
}

Dict<double> read_dict(const std::string& path) {
  auto file = read_matrix_file(path);
  if (!file.structure) {
    throw FormatError(path + ": dictionary file needs block_sizes (use the JSON wrapper)");
  }
  return Dict<double>(std::move(file.matrix), *file.structure);
}

nlohmann::json to_json(const CoherenceReport<double>& report) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return nlohmann::json{{"mu", opt(report.mu)},
                        {"mu_block", opt(report.mu_block)},
                        {"nu_sub", report.nu_sub},
                        {"total_inter", report.total_inter},
                        {"total_sub", report.total_sub},
                        {"norm_penalty", report.norm_penalty}};
}

}  // namespace wcm
