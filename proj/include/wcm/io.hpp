#ifndef WCM_IO_HPP
#define WCM_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "wcm/block_model.hpp"
#include "wcm/coherence.hpp"

namespace wcm {

/// printf("%.17g"); round-trips every double exactly.
std::string format_double(double value);

/// Plain CSV: one matrix row per line, comma separated, %.17g.
void write_csv(std::ostream& out, const Mat<double>& m);
void write_csv(const std::string& path, const Mat<double>& m);
Mat<double> read_csv(std::istream& in);
Mat<double> read_csv(const std::string& path);

/// Matrix plus optional block partition, as stored in the JSON wrapper
/// { "rows", "cols", "block_sizes", "data" (row-major) }.
struct MatrixFile {
  Mat<double> matrix;
  std::optional<BlockStructure> structure;
};

nlohmann::json matrix_to_json(const Mat<double>& m, const std::optional<BlockStructure>& s);
MatrixFile matrix_from_json(const nlohmann::json& j);

/// Reads a JSON wrapper (by ".json" extension) or a plain CSV file.
MatrixFile read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Mat<double>& m,
                       const std::optional<BlockStructure>& s = std::nullopt);

/// Dictionary file: the JSON wrapper with block_sizes present.
Dict<double> read_dict(const std::string& path);

/// Fields mu, mu_block, nu_sub, total_inter, total_sub, norm_penalty;
/// absent optional metrics serialize as null.
nlohmann::json to_json(const CoherenceReport<double>& report);

}  // namespace wcm

#endif  // WCM_IO_HPP
