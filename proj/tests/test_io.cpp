#include <cstdio>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "wcm/io.hpp"

using namespace wcm;
using oracle::Matrix;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("wcm_io_" + name)).string();
}

}  // namespace

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(81);
  const Matrix m = oracle::gaussian(1, 200, rng) * 1e3;
  for (Index i = 0; i < m.cols(); ++i) CHECK(std::stod(format_double(m(0, i))) == m(0, i));
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-3) == "-3");
}

TEST_CASE("csv round trip is exact") {
  std::mt19937_64 rng(82);
  const Matrix m = oracle::gaussian(7, 4, rng);
  std::stringstream s;
  write_csv(s, m);
  CHECK(read_csv(s) == m);

  const std::string path = temp_path("m.csv");
  write_csv(path, m);
  CHECK(read_csv(path) == m);
  const auto file = read_matrix_file(path);
  CHECK(file.matrix == m);
  CHECK_FALSE(file.structure.has_value());
  std::remove(path.c_str());
}

TEST_CASE("csv errors") {
  std::stringstream ragged("1,2,3\n4,5\n");
  CHECK_THROWS_AS(read_csv(ragged), FormatError);
  std::stringstream junk("1,x\n");
  CHECK_THROWS_AS(read_csv(junk), FormatError);
  std::stringstream trailing("1,2abc\n");
  CHECK_THROWS_AS(read_csv(trailing), FormatError);
  CHECK_THROWS_AS(read_csv(std::string("/nonexistent/dir/m.csv")), FormatError);
}

TEST_CASE("json wrapper keeps the block partition") {
  std::mt19937_64 rng(83);
  const Matrix m = oracle::gaussian(3, 5, rng);
  const BlockStructure s({2, 3});
  const auto j = matrix_to_json(m, s);
  CHECK(j.at("rows") == 3);
  CHECK(j.at("cols") == 5);
  CHECK(j.at("block_sizes") == nlohmann::json({2, 3}));
  CHECK(j.at("data").size() == 15);
  CHECK(j.at("data")[1].get<double>() == m(0, 1));  // row-major

  const auto back = matrix_from_json(j);
  CHECK(back.matrix == m);
  CHECK(*back.structure == s);

  const std::string path = temp_path("d.json");
  write_matrix_file(path, m, s);
  const auto d = read_dict(path);
  CHECK(d.matrix() == m);
  CHECK(d.structure() == s);
  write_matrix_file(path, m);
  CHECK_THROWS_AS(read_dict(path), FormatError);
  std::remove(path.c_str());

  auto bad = j;
  bad["data"].erase(0);
  CHECK_THROWS_AS(matrix_from_json(bad), FormatError);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json{{"rows", 1}}), FormatError);
}

TEST_CASE("coherence report json has exactly the documented fields") {
  std::mt19937_64 rng(84);
  const Matrix e = oracle::unit_columns(oracle::gaussian(6, 12, rng));
  const auto uniform = to_json(coherence_report(e, BlockStructure::uniform(3, 4)));
  for (const char* key : {"mu", "mu_block", "nu_sub", "total_inter", "total_sub", "norm_penalty"})
    CHECK(uniform.contains(key));
  CHECK(uniform.size() == 6);
  CHECK(uniform.at("mu_block").is_number());

  const auto mixed = to_json(coherence_report(e, BlockStructure({5, 7})));
  CHECK(mixed.at("mu_block").is_null());
}
