#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

// End-to-end checks of the nyquist-lab binary: exit-code contract,
// output files, summary lines, determinism. The binary path comes from the
// NYQUIST_LAB_BIN environment variable set by ctest.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string binary() {
  const char* p = std::getenv("NYQUIST_LAB_BIN");
  REQUIRE_MESSAGE(p != nullptr, "NYQUIST_LAB_BIN must point at the binary");
  return p;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "nyqlab_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_config(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2);
}

int run(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = binary() + " " + args;
  if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
  cmd += " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json dpss_config() {
  return json{{"backend", "dpss"},
              {"dpss", {{"N", 64}, {"W", 0.25}}},
              {"epsilon", 0.2},
              {"sigma_sq", 0.02},
              {"gamma", 0.5},
              {"delta", 0.1}};
}

}  // namespace

TEST_CASE("spectrum command writes csv and json") {
  const auto dir = fresh_dir("spectrum");
  write_config(dir / "cfg.json", dpss_config());

  CHECK(run("spectrum --config " + (dir / "cfg.json").string() + " --out " +
            dir.string()) == 0);

  std::ifstream csv(dir / "spectrum.csv");
  REQUIRE(csv.good());
  std::string line;
  std::getline(csv, line);
  CHECK(line == "index,eigenvalue");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 64);

  std::ifstream jf(dir / "spectrum.json");
  const json meta = json::parse(jf);
  CHECK(std::abs(meta.at("trace").get<double>() - 32.0) <= 1e-12 * 32.0);
  CHECK(meta.contains("config_hash"));
  CHECK(meta.at("residual_bound").get<double>() < 1e-8);
}

TEST_CASE("format selection limits the outputs") {
  const auto dir = fresh_dir("formats");
  write_config(dir / "cfg.json", dpss_config());
  CHECK(run("spectrum --config " + (dir / "cfg.json").string() + " --out " +
            dir.string() + " --format csv") == 0);
  CHECK(fs::exists(dir / "spectrum.csv"));
  CHECK(!fs::exists(dir / "spectrum.json"));
}

TEST_CASE("nystrom backend end to end") {
  const auto dir = fresh_dir("nystrom");
  const json cfg = json::parse(R"({
    "backend": "nystrom",
    "nystrom": {
      "time_set": {"dim": 1, "parts": [{"box": [[0, 1]]}]},
      "band_set": {"dim": 1, "parts": [{"box": [[-3.141592653589793, 3.141592653589793]]}]},
      "grid": {"extent": 2.0, "step": 0.0625},
      "r": 1.0
    },
    "scales": [1.0, 2.0, 3.0],
    "epsilon": 0.2, "sigma_sq": 0.02, "gamma": 0.5, "delta": 0.1
  })");
  write_config(dir / "cfg.json", cfg);

  CHECK(run("spectrum --config " + (dir / "cfg.json").string() + " --out " +
            dir.string()) == 0);
  std::ifstream jf(dir / "spectrum.json");
  const json meta = json::parse(jf);
  CHECK(std::abs(meta.at("trace").get<double>() - 1.0) <= 1e-9);
  CHECK(meta.at("set_size").get<int>() == 16);

  CHECK(run("sweep --config " + (dir / "cfg.json").string() + " --out " +
            dir.string()) == 0);
  std::ifstream sf(dir / "sweep.json");
  const json sj = json::parse(sf);
  REQUIRE(sj.at("entries").size() == 3);
  CHECK(std::abs(sj.at("entries").back().at("density").get<double>() - 1.0) <=
        0.10);
}

TEST_CASE("config errors exit with code 2") {
  const auto dir = fresh_dir("cfg_errors");

  json missing = dpss_config();
  missing.erase("backend");
  write_config(dir / "missing.json", missing);
  CHECK(run("spectrum --config " + (dir / "missing.json").string()) == 2);

  json unknown = dpss_config();
  unknown["typo_key"] = 1;
  write_config(dir / "unknown.json", unknown);
  CHECK(run("spectrum --config " + (dir / "unknown.json").string()) == 2);

  json bad_eps = dpss_config();
  bad_eps["epsilon"] = 0.6;
  write_config(dir / "eps.json", bad_eps);
  CHECK(run("family --config " + (dir / "eps.json").string() + " --out " +
            dir.string()) == 2);

  json sigma_eq = dpss_config();
  sigma_eq["sigma_sq"] = 0.2;
  write_config(dir / "sigma.json", sigma_eq);
  CHECK(run("family --config " + (dir / "sigma.json").string() + " --out " +
            dir.string()) == 2);

  write_config(dir / "scales.json", [] {
    json j = dpss_config();
    j["scales"] = {256, 128, 64};
    return j;
  }());
  CHECK(run("sweep --config " + (dir / "scales.json").string() + " --out " +
            dir.string()) == 2);

  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(run("spectrum --config " + (dir / "broken.json").string()) == 2);

  CHECK(run("spectrum --config /does/not/exist.json") == 2);
}

TEST_CASE("unwritable output directory exits with code 3") {
  const auto dir = fresh_dir("unwritable");
  write_config(dir / "cfg.json", dpss_config());
  std::ofstream(dir / "blocked") << "";  // a plain file occupies the out path
  CHECK(run("spectrum --config " + (dir / "cfg.json").string() + " --out " +
            (dir / "blocked").string()) == 3);
}

TEST_CASE("family command prints the summary line") {
  const auto dir = fresh_dir("family");
  write_config(dir / "cfg.json", dpss_config());
  CHECK(run("family --config " + (dir / "cfg.json").string() + " --out " +
                dir.string(),
            dir / "stdout.txt") == 0);
  const std::string out = slurp(dir / "stdout.txt");
  CHECK(out.find("blocks=6 n=5 size=36 max_residual=") != std::string::npos);

  std::ifstream jf(dir / "family.json");
  const json manifest = json::parse(jf);
  CHECK(manifest.at("size").get<long>() == 36);
  CHECK(manifest.at("block_count").get<int>() == 6);
  CHECK(manifest.contains("config_hash"));

  const auto rows = [&] {
    std::ifstream csv(dir / "family.csv");
    int n = 0;
    std::string line;
    while (std::getline(csv, line)) ++n;
    return n;
  }();
  CHECK(rows == 96);  // ambient rows: 64 + max(32, 64/2)
}

TEST_CASE("empty family still succeeds with a diagnostic") {
  const auto dir = fresh_dir("family_empty");
  json cfg = dpss_config();
  cfg["dpss"]["N"] = 4;
  write_config(dir / "cfg.json", cfg);
  CHECK(run("family --config " + (dir / "cfg.json").string() + " --out " +
                dir.string(),
            dir / "stdout.txt") == 0);
  const std::string out = slurp(dir / "stdout.txt");
  CHECK(out.find("size=0") != std::string::npos);
  CHECK(out.find("diagnostic") != std::string::npos);
}

TEST_CASE("dpss sweep with the sandwich check") {
  const auto dir = fresh_dir("sweep");
  json cfg = dpss_config();
  cfg["scales"] = {64, 128, 256};
  write_config(dir / "cfg.json", cfg);
  CHECK(run("sweep --config " + (dir / "cfg.json").string() + " --out " +
                dir.string(),
            dir / "stdout.txt") == 0);

  std::ifstream csv(dir / "sweep.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "scale,count_above,plunge,trace,density,family_size,"
                  "upper_bound");
  int rows = 0;
  std::string line;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 3);

  std::ifstream jf(dir / "sweep.json");
  const json sj = json::parse(jf);
  for (const auto& e : sj.at("entries")) {
    CHECK(e.at("sandwich_ok").get<bool>());
    CHECK(std::abs(e.at("density").get<double>() / 0.5 - 1.0) <= 0.05);
  }
  const std::string out = slurp(dir / "stdout.txt");
  CHECK(out.find("sandwich=pass") != std::string::npos);
  CHECK(out.find("sandwich=fail") == std::string::npos);
}

TEST_CASE("gabor disk sweep reports bracketed densities") {
  const auto dir = fresh_dir("gabor_sweep");
  // the documented config syntax, verbatim
  const json cfg = json::parse(R"({
    "backend": "gabor",
    "gabor": {
      "plane_set": {"dim": 2, "parts": [{"disk": {"center": [0, 0], "radius": 2}}]},
      "grid": {"extent": 3.0, "step": 0.1875},
      "r": 1.0
    },
    "scales": [1.0, 1.5, 2.0],
    "epsilon": 0.2, "sigma_sq": 0.02, "gamma": 0.5, "delta": 0.1
  })");
  write_config(dir / "cfg.json", cfg);
  CHECK(run("sweep --config " + (dir / "cfg.json").string() + " --out " +
                dir.string(),
            dir / "stdout.txt") == 0);

  std::ifstream jf(dir / "sweep.json");
  const json sj = json::parse(jf);
  CHECK(sj.at("scale_exponent").get<int>() == 2);
  const double upper = 4 * std::numbers::pi / (1.0 - 0.4);
  for (const auto& e : sj.at("entries")) {
    CHECK(e.at("sandwich_ok").get<bool>());
    const double fam_density = e.at("family_size").get<double>() /
                               std::pow(e.at("scale").get<double>(), 2);
    CHECK(fam_density <= upper);
  }
}

TEST_CASE("gabor family end to end") {
  const auto dir = fresh_dir("gabor_family");
  const json cfg = json::parse(R"({
    "backend": "gabor",
    "gabor": {
      "plane_set": {"dim": 2, "parts": [{"disk": {"center": [0, 0], "radius": 2}}]},
      "grid": {"extent": 3.0, "step": 0.1875},
      "r": 1.0
    },
    "epsilon": 0.2, "sigma_sq": 0.02, "gamma": 0.5, "delta": 0.1
  })");
  write_config(dir / "cfg.json", cfg);
  CHECK(run("family --config " + (dir / "cfg.json").string() + " --out " +
                dir.string(),
            dir / "stdout.txt") == 0);
  CHECK(slurp(dir / "stdout.txt").find("size=6") != std::string::npos);

  std::ifstream jf(dir / "family.json");
  const json manifest = json::parse(jf);
  CHECK(manifest.at("size").get<long>() == 6);
  CHECK(manifest.at("max_residual").get<double>() <= 0.2 + 1e-6);

  // complex vectors interleave re/im: 2 * size columns
  std::ifstream csv(dir / "family.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(std::count(line.begin(), line.end(), ',') == 11);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  const auto dir1 = fresh_dir("det1");
  const auto dir2 = fresh_dir("det2");
  json cfg = dpss_config();
  cfg["seed"] = 42;
  write_config(dir1 / "cfg.json", cfg);
  write_config(dir2 / "cfg.json", cfg);
  CHECK(run("spectrum --config " + (dir1 / "cfg.json").string() + " --out " +
            dir1.string()) == 0);
  CHECK(run("spectrum --config " + (dir2 / "cfg.json").string() + " --out " +
            dir2.string()) == 0);
  CHECK(slurp(dir1 / "spectrum.csv") == slurp(dir2 / "spectrum.csv"));
  CHECK(slurp(dir1 / "spectrum.json") == slurp(dir2 / "spectrum.json"));
  CHECK(!slurp(dir1 / "spectrum.csv").empty());
}

TEST_CASE("seed flag changes the recorded hash, not the spectrum") {
  const auto dir = fresh_dir("seeded");
  write_config(dir / "cfg.json", dpss_config());
  CHECK(run("spectrum --config " + (dir / "cfg.json").string() + " --out " +
            dir.string() + " --seed 7") == 0);
  std::ifstream jf(dir / "spectrum.json");
  const json meta = json::parse(jf);
  CHECK(meta.at("seed").get<std::uint64_t>() == 7);
}
