#include <doctest.h>

#include <cstring>
#include <fstream>

#include "pcl/errors.hpp"
#include "pcl/grid_field.hpp"
#include "test_support.hpp"

using namespace pcl;
using testing_support::fill_random;
using testing_support::scratch_dir;

TEST_CASE("field shapes follow the kind") {
  const auto g = default_allen_cahn().grid;
  const auto u = GridField::zeros(FieldKind::Control, g);
  const auto y = GridField::zeros(FieldKind::State, g);
  CHECK(u.n_space() == 513);
  CHECK(u.n_cols() == 60);
  CHECK(u.size() == 30780);
  CHECK(y.n_cols() == 61);
  CHECK(u.matches(g));
  CHECK(y.matches(g));
  CHECK_FALSE(GridField(FieldKind::Control, 513, 61).matches(g));
}

TEST_CASE("column storage: flat index is n * N + i") {
  GridField f(FieldKind::State, 4, 3);
  f(2, 1) = 7.0;
  CHECK(f.flat()[1 * 4 + 2] == 7.0);
  CHECK(f.column(1)[2] == 7.0);
}

TEST_CASE("finite check") {
  GridField f(FieldKind::State, 3, 2);
  CHECK(f.all_finite());
  f(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(f.all_finite());
}

TEST_CASE("CSV round trip is exact and has the documented header") {
  const auto g = GridSpec::uniform(9, 3, 3.0, 1);
  auto f = GridField::zeros(FieldKind::Control, g);
  fill_random(f, 3);
  f(0, 0) = 1.0 / 3.0;
  const auto dir = scratch_dir("csv");
  write_csv(dir / "u.csv", f, g);
  std::ifstream in(dir / "u.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,0,1,2");
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("0,0.33333333333333331,", 0) == 0);
  CHECK(read_csv(dir / "u.csv", FieldKind::Control) == f);
  CHECK(read_field(dir / "u.csv", FieldKind::Control) == f);
}

TEST_CASE("binary layout: magic, rank 2, dims, row-major float64") {
  GridField f(FieldKind::State, 3, 2);
  fill_random(f, 11);
  const auto dir = scratch_dir("bin");
  write_binary(dir / "y.bin", f);
  std::ifstream in(dir / "y.bin", std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::memcmp(magic, "PCL1", 4) == 0);
  std::uint64_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  CHECK(header[0] == 2);
  CHECK(header[1] == 3);
  CHECK(header[2] == 2);
  double values[6];
  in.read(reinterpret_cast<char*>(values), sizeof values);
  CHECK(values[0] == f(0, 0));
  CHECK(values[1] == f(0, 1));
  CHECK(values[2] == f(1, 0));
  CHECK(values[5] == f(2, 1));
  CHECK(read_binary(dir / "y.bin", FieldKind::State) == f);
  CHECK(read_field(dir / "y.bin", FieldKind::State) == f);
}

TEST_CASE("corrupt or missing files raise IoError") {
  const auto dir = scratch_dir("bad");
  CHECK_THROWS_AS(read_binary(dir / "missing.bin", FieldKind::State), IoError);
  std::ofstream(dir / "junk.bin") << "NOPE";
  CHECK_THROWS_AS(read_binary(dir / "junk.bin", FieldKind::State), IoError);
  std::ofstream(dir / "ragged.csv") << "x,0,1\n0,1,2\n0.5,1\n";
  CHECK_THROWS_AS(read_csv(dir / "ragged.csv", FieldKind::Control), IoError);
}

TEST_CASE("series CSV") {
  const auto dir = scratch_dir("series");
  const double t[] = {0.0, 0.5};
  const double v[] = {1.0, 2.0};
  write_series_csv(dir / "s.csv", t, v);
  std::ifstream in(dir / "s.csv");
  std::string a, b;
  std::getline(in, a);
  std::getline(in, b);
  CHECK(a == "0,0.5");
  CHECK(b == "1,2");
}
