#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "nyqlab/gabor.hpp"
#include "nyqlab/io.hpp"

using namespace nyqlab;
namespace fs = std::filesystem;

static fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / "nyqlab_io_test";
  fs::create_directories(p);
  return p;
}

TEST_CASE("number formatting round-trips doubles exactly") {
  for (double v : {1.0 / 3.0, std::numbers::pi, 2.0 * 32 * 0.25, 1e-300}) {
    CHECK(std::stod(io::g17(v)) == v);
  }
  CHECK(io::g17(32.0) == "32");
}

TEST_CASE("config hash is deterministic and content-sensitive") {
  CHECK(io::hash_hex("abc") == io::hash_hex("abc"));
  CHECK(io::hash_hex("abc") != io::hash_hex("abd"));
  CHECK(io::hash_hex("").size() == 16);
}

TEST_CASE("real operator dump/load round trip") {
  const auto dir = temp_dir();
  const SetSpec t = SetSpec::interval(0, 1);
  const BandSpec band = BandSpec::centered_band(std::numbers::pi);
  const Grid g(1, 2.0, 0.25);
  const auto op = build_nystrom(t, band, g, 1.0);

  io::dump_operator(dir / "op.csv", dir / "op.json", op);
  const auto back = io::load_operator<double>(dir / "op.csv", dir / "op.json");

  CHECK(back.backend == op.backend);
  CHECK(back.ambient_dim == op.ambient_dim);
  CHECK(back.set_indices == op.set_indices);
  CHECK(back.analytic_trace == op.analytic_trace);
  CHECK(back.weight == op.weight);
  REQUIRE(back.grid.has_value());
  CHECK(back.grid->step() == g.step());
  CHECK((back.block - op.block).cwiseAbs().maxCoeff() == 0.0);  // bit exact

  CHECK_THROWS_AS(
      io::load_operator<std::complex<double>>(dir / "op.csv", dir / "op.json"),
      std::runtime_error);
}

TEST_CASE("complex operator dump/load round trip") {
  const auto dir = temp_dir();
  const auto op =
      build_gabor_operator(SetSpec::disk({0, 0}, 1.0), Grid(2, 3.0, 0.25), 1.0);
  io::dump_operator(dir / "gop.csv", dir / "gop.json", op);
  const auto back = io::load_operator<std::complex<double>>(dir / "gop.csv",
                                                            dir / "gop.json");
  CHECK(back.backend == Backend::gabor);
  CHECK((back.block - op.block).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.analytic_trace == op.analytic_trace);

  // the gabor sidecar records the window
  std::ifstream in(dir / "gop.json");
  const auto sidecar = nlohmann::json::parse(in);
  CHECK(sidecar.at("window").at("type").get<std::string>() == "gaussian");
}

TEST_CASE("spectrum csv format") {
  const auto dir = temp_dir();
  const auto op = build_dpss(8, 0.25);
  const auto spec = eigendecompose(op);
  io::write_spectrum_csv(dir / "spectrum.csv", spec);

  std::ifstream in(dir / "spectrum.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "index,eigenvalue");
  int rows = 0;
  double prev = 2.0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    CHECK(std::stoi(line.substr(0, comma)) == rows);
    const double v = std::stod(line.substr(comma + 1));
    CHECK(v <= prev);
    prev = v;
    ++rows;
  }
  CHECK(rows == 8);

  const auto meta = io::spectrum_metadata(spec, op);
  CHECK(meta.at("trace").get<double>() == spec.sum_values());
  CHECK(meta.at("backend").get<std::string>() == "dpss");
  CHECK(meta.at("residual_bound").get<double>() == spec.residual_bound);
}

TEST_CASE("family and sweep exports") {
  const auto dir = temp_dir();
  const auto op = build_dpss(16, 0.25);
  const auto spec = eigendecompose(op);
  const auto fam = construct_family(spec, op, select_parameters(0.2, 0.02));
  io::write_family(dir / "family.csv", dir / "family.json", fam);

  const auto rows = io::detail::read_csv(dir / "family.csv");
  CHECK(static_cast<long>(rows.size()) == op.ambient_dim);
  CHECK(static_cast<long>(rows[0].size()) == fam.size());

  std::ifstream fin(dir / "family.json");
  const auto manifest = nlohmann::json::parse(fin);
  CHECK(manifest.at("n").get<int>() == 5);
  CHECK(manifest.at("size").get<long>() == fam.size());
  CHECK(manifest.at("residuals").size() ==
        static_cast<std::size_t>(fam.size()));

  const std::function<RealOperator(double)> factory = [](double n) {
    return build_dpss(static_cast<int>(n), 0.25);
  };
  const auto sweep =
      run_sweep<double>({16, 32, 64}, factory, 0.5, 0.1, 0.5, 1, nullptr);
  io::write_sweep_csv(dir / "sweep.csv", sweep, false);
  std::ifstream sin(dir / "sweep.csv");
  std::string header;
  std::getline(sin, header);
  CHECK(header == "scale,count_above,plunge,trace,density");
  const auto sj = io::sweep_json(sweep, false);
  CHECK(sj.at("entries").size() == 3);
  CHECK(sj.at("reference_density").get<double>() == 0.5);
}

TEST_CASE("unwritable destination reports a runtime error") {
  CHECK_THROWS_AS(io::open_out("/nonexistent_dir_xyz/file.csv"),
                  std::runtime_error);
}
