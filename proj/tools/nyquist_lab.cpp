// nyquist-lab: configuration-driven front end for the localization toolkit.
//
//   nyquist-lab <spectrum|family|sweep> --config cfg.json [--out dir]
//               [--format csv,json] [--seed <u64>]
//
// Exit codes: 0 success, 2 configuration error, 3 numeric/runtime failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <variant>

#include "nyqlab/counts.hpp"
#include "nyqlab/family.hpp"
#include "nyqlab/gabor.hpp"
#include "nyqlab/io.hpp"
#include "nyqlab/spectral.hpp"
#include "nyqlab/timeband.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nyqlab;

namespace {

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& context) {
  if (!j.is_object())
    throw std::invalid_argument("config: " + context + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key \"" + key + "\" in " +
                                  context);
}

SetSpec parse_set(const json& j, const std::string& context) {
  require_keys(j, {"dim", "parts", "label"}, context);
  const int dim = j.at("dim").get<int>();
  std::vector<Box> boxes;
  std::vector<Disk> disks;
  for (const auto& part : j.at("parts")) {
    require_keys(part, {"box", "disk"}, context + ".parts[]");
    if (part.contains("box")) {
      Box b;
      for (const auto& side : part["box"])
        b.sides.push_back({side.at(0).get<double>(), side.at(1).get<double>()});
      boxes.push_back(std::move(b));
    }
    if (part.contains("disk")) {
      const auto& d = part["disk"];
      require_keys(d, {"center", "radius"}, context + ".disk");
      disks.push_back(Disk{{d.at("center").at(0).get<double>(),
                            d.at("center").at(1).get<double>()},
                           d.at("radius").get<double>()});
    }
  }
  return SetSpec(dim, std::move(boxes), std::move(disks),
                 j.value("label", std::string{}));
}

Grid parse_grid(const json& j, int dim, const std::string& context) {
  require_keys(j, {"extent", "step"}, context);
  return Grid(dim, j.at("extent").get<double>(), j.at("step").get<double>());
}

struct RunConfig {
  json raw;
  std::string backend;
  double epsilon = 0.2;
  double sigma_sq = 0.02;
  double gamma = 0.5;
  double delta = 0.1;
  std::vector<double> scales;
  std::uint64_t seed = 0;
  fs::path out_dir = ".";
  bool want_csv = true;
  bool want_json = true;
  std::string hash;
};

RunConfig parse_config(const fs::path& path, const std::string& out_override,
                       const std::string& format_override,
                       std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open " + path.string());
  RunConfig cfg;
  try {
    cfg.raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }

  require_keys(cfg.raw,
               {"backend", "dpss", "nystrom", "gabor", "scales", "epsilon",
                "sigma_sq", "gamma", "delta", "seed", "out_dir", "formats"},
               "top level");
  cfg.backend = cfg.raw.at("backend").get<std::string>();
  if (cfg.backend != "dpss" && cfg.backend != "nystrom" &&
      cfg.backend != "gabor")
    throw std::invalid_argument("config: unknown backend " + cfg.backend);
  if (!cfg.raw.contains(cfg.backend))
    throw std::invalid_argument("config: missing required key \"" +
                                cfg.backend + "\"");

  cfg.epsilon = cfg.raw.value("epsilon", cfg.epsilon);
  cfg.sigma_sq = cfg.raw.value("sigma_sq", cfg.sigma_sq);
  cfg.gamma = cfg.raw.value("gamma", cfg.gamma);
  cfg.delta = cfg.raw.value("delta", cfg.delta);
  if (cfg.raw.contains("scales"))
    cfg.scales = cfg.raw["scales"].get<std::vector<double>>();
  cfg.seed = cfg.raw.value("seed", std::uint64_t{0});
  if (seed_override) cfg.seed = *seed_override;
  cfg.out_dir = cfg.raw.value("out_dir", std::string{"."});
  if (!out_override.empty()) cfg.out_dir = out_override;

  std::string formats = format_override;
  if (formats.empty() && cfg.raw.contains("formats")) {
    formats.clear();
    for (const auto& f : cfg.raw["formats"])
      formats += f.get<std::string>() + ",";
  }
  if (!formats.empty()) {
    cfg.want_csv = formats.find("csv") != std::string::npos;
    cfg.want_json = formats.find("json") != std::string::npos;
    if (!cfg.want_csv && !cfg.want_json)
      throw std::invalid_argument("config: formats must include csv or json");
  }

  json hashed = cfg.raw;
  hashed["seed"] = cfg.seed;
  cfg.hash = io::hash_hex(hashed.dump());
  return cfg;
}

// Operator factory per backend; scale overrides N (dpss) or r (others).
// For dilation backends the grid extent scales with r so resolution per
// unit length stays constant across a sweep.
std::variant<RealOperator, ComplexOperator> build_operator(
    const RunConfig& cfg, std::optional<double> scale = {}) {
  const json& b = cfg.raw.at(cfg.backend);
  if (cfg.backend == "dpss") {
    require_keys(b, {"N", "W", "ambient"}, "dpss");
    double n = b.at("N").get<double>();
    if (scale) n = *scale;
    if (n < 1 || n != std::floor(n))
      throw std::invalid_argument("config: dpss N must be a positive integer");
    return build_dpss(static_cast<int>(n), b.at("W").get<double>(),
                      b.value("ambient", 0L));
  }
  if (cfg.backend == "nystrom") {
    require_keys(b, {"time_set", "band_set", "grid", "r"}, "nystrom");
    const SetSpec t = parse_set(b.at("time_set"), "nystrom.time_set");
    const BandSpec band(parse_set(b.at("band_set"), "nystrom.band_set"));
    const double r = scale ? *scale : b.value("r", 1.0);
    json gj = b.at("grid");
    require_keys(gj, {"extent", "step"}, "nystrom.grid");
    const Grid g(t.dimension(), gj.at("extent").get<double>() * r,
                 gj.at("step").get<double>());
    return build_nystrom(t, band, g, r);
  }
  require_keys(b, {"plane_set", "grid", "r"}, "gabor");
  const SetSpec s = parse_set(b.at("plane_set"), "gabor.plane_set");
  const double r = scale ? *scale : b.value("r", 1.0);
  json gj = b.at("grid");
  require_keys(gj, {"extent", "step"}, "gabor.grid");
  const Grid g(2, gj.at("extent").get<double>() * r,
               gj.at("step").get<double>());
  return build_gabor_operator(s, g, r);
}

double reference_density(const RunConfig& cfg) {
  const json& b = cfg.raw.at(cfg.backend);
  if (cfg.backend == "dpss") return 2.0 * b.at("W").get<double>();
  if (cfg.backend == "nystrom") {
    const SetSpec t = parse_set(b.at("time_set"), "nystrom.time_set");
    const SetSpec omega = parse_set(b.at("band_set"), "nystrom.band_set");
    double two_pi_d = 1.0;
    for (int a = 0; a < t.dimension(); ++a)
      two_pi_d *= 2.0 * std::numbers::pi;
    return measure(t) * measure(omega) / two_pi_d;
  }
  return measure(parse_set(b.at("plane_set"), "gabor.plane_set"));
}

int scale_exponent(const RunConfig& cfg) {
  const json& b = cfg.raw.at(cfg.backend);
  if (cfg.backend == "dpss") return 1;
  if (cfg.backend == "nystrom")
    return parse_set(b.at("time_set"), "nystrom.time_set").dimension();
  return 2;  // plane operators count per r^{2d}, d = 1
}

void write_json_file(const fs::path& p, json j, const RunConfig& cfg) {
  j["config_hash"] = cfg.hash;
  j["seed"] = cfg.seed;
  auto out = io::open_out(p);
  out << j.dump(2) << '\n';
}

template <typename Scalar>
int spectrum_for(const DiscreteOperator<Scalar>& op, const RunConfig& cfg) {
  const Spectrum<Scalar> spec = eigendecompose(op);
  if (cfg.want_csv)
    io::write_spectrum_csv(cfg.out_dir / "spectrum.csv", spec);
  if (cfg.want_json)
    write_json_file(cfg.out_dir / "spectrum.json",
                    io::spectrum_metadata(spec, op), cfg);
  std::printf("count=%ld trace=%s residual_bound=%s\n", spec.size(),
              io::g17(spec.sum_values()).c_str(),
              io::g17(spec.residual_bound).c_str());
  return 0;
}

template <typename Scalar>
int family_for(const DiscreteOperator<Scalar>& op, const RunConfig& cfg) {
  const FamilyParams params = select_parameters(cfg.epsilon, cfg.sigma_sq);
  const Spectrum<Scalar> spec = eigendecompose(op);
  const LocalizedFamily<Scalar> fam = construct_family(spec, op, params);
  if (cfg.want_csv)
    io::write_family_matrix(cfg.out_dir / "family.csv", fam);
  if (cfg.want_json)
    write_json_file(cfg.out_dir / "family.json", io::family_manifest(fam),
                    cfg);
  std::printf("blocks=%d n=%d size=%ld max_residual=%s\n", fam.block_count,
              fam.params.n, fam.size(), io::g17(fam.max_residual()).c_str());
  if (!fam.diagnostic.empty())
    std::printf("diagnostic: %s\n", fam.diagnostic.c_str());
  return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
  auto op = build_operator(cfg);
  return std::visit([&](const auto& o) { return spectrum_for(o, cfg); }, op);
}

int cmd_family(const RunConfig& cfg) {
  auto op = build_operator(cfg);
  return std::visit([&](const auto& o) { return family_for(o, cfg); }, op);
}

template <typename Scalar>
int sweep_for(const RunConfig& cfg) {
  const FamilyParams params = select_parameters(cfg.epsilon, cfg.sigma_sq);
  const std::function<DiscreteOperator<Scalar>(double)> factory =
      [&cfg](double s) {
        return std::get<DiscreteOperator<Scalar>>(build_operator(cfg, s));
      };
  const SweepResult sweep =
      run_sweep<Scalar>(cfg.scales, factory, cfg.gamma, cfg.delta,
                        reference_density(cfg), scale_exponent(cfg), &params);
  if (cfg.want_csv)
    io::write_sweep_csv(cfg.out_dir / "sweep.csv", sweep, true);
  if (cfg.want_json)
    write_json_file(cfg.out_dir / "sweep.json", io::sweep_json(sweep, true),
                    cfg);
  for (const auto& e : sweep.entries)
    std::printf("scale=%s count=%d plunge=%d density=%s family=%ld "
                "upper_bound=%s sandwich=%s\n",
                io::g17(e.scale).c_str(), e.count_above, e.plunge,
                io::g17(e.density).c_str(), e.family_size,
                io::g17(e.upper_bound).c_str(),
                e.family_size <= e.upper_bound ? "pass" : "fail");
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.scales.empty())
    throw std::invalid_argument("config: sweep requires \"scales\"");
  if (cfg.backend == "gabor") return sweep_for<std::complex<double>>(cfg);
  return sweep_for<double>(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale degrees-of-freedom experiments for time-frequency "
               "localization operators"};
  app.require_subcommand(1);

  std::string config_path, out_dir, formats;
  std::optional<std::uint64_t> seed;
  for (const char* name : {"spectrum", "family", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", formats, "comma list: csv,json");
    sub->add_option("--seed", seed, "seed recorded in output metadata");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg =
        parse_config(config_path, out_dir, formats, seed);
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "spectrum") return cmd_spectrum(cfg);
    if (cmd == "family") return cmd_family(cfg);
    return cmd_sweep(cfg);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
