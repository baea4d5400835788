#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nyqlab/counts.hpp"
#include "nyqlab/family.hpp"
#include "nyqlab/spectral.hpp"
#include "nyqlab/timeband.hpp"

// File formats: CSV matrices and spectra with 17 significant digits (exact
// double round-trip), JSON sidecars and manifests carrying the metadata
// needed to reproduce a run. All output is deterministic for a fixed input.

namespace nyqlab::io {

using nlohmann::json;

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(const std::string& s) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a(s));
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + p.string());
  return out;
}

// ---- spectra ----

template <typename Scalar>
void write_spectrum_csv(const std::filesystem::path& p,
                        const Spectrum<Scalar>& spec) {
  auto out = open_out(p);
  out << "index,eigenvalue\n";
  for (long i = 0; i < spec.size(); ++i)
    out << i << ',' << g17(spec.values[i]) << '\n';
}

template <typename Scalar>
json spectrum_metadata(const Spectrum<Scalar>& spec,
                       const DiscreteOperator<Scalar>& op) {
  json j;
  j["backend"] = backend_name(op.backend);
  j["count"] = spec.size();
  j["trace"] = spec.sum_values();
  j["sum_squares"] = spec.sum_squares();
  j["analytic_trace"] = op.analytic_trace;
  j["residual_bound"] = spec.residual_bound;
  j["ambient_dim"] = op.ambient_dim;
  j["set_size"] = op.set_size();
  return j;
}

// ---- operators ----

namespace detail {

inline void write_matrix_csv(std::ofstream& out, const Eigen::MatrixXd& m) {
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << g17(m(i, j));
    out << '\n';
  }
}

inline void write_matrix_csv(std::ofstream& out, const Eigen::MatrixXcd& m) {
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << g17(m(i, j).real()) << ','
          << g17(m(i, j).imag());
    out << '\n';
  }
}

inline std::vector<std::vector<double>> read_csv(
    const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open for reading: " + p.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Scalar>
const char* scalar_name() {
  return std::is_same_v<Scalar, double> ? "real" : "complex";
}

}  // namespace detail

template <typename Scalar>
void dump_operator(const std::filesystem::path& matrix_csv,
                   const std::filesystem::path& sidecar_json,
                   const DiscreteOperator<Scalar>& op) {
  {
    auto out = open_out(matrix_csv);
    detail::write_matrix_csv(out, op.block);
  }
  json j;
  j["backend"] = backend_name(op.backend);
  j["scalar"] = detail::scalar_name<Scalar>();
  j["ambient_dim"] = op.ambient_dim;
  j["set_indices"] = op.set_indices;
  j["analytic_trace"] = op.analytic_trace;
  j["weight"] = op.weight;
  if (op.grid) {
    j["grid"] = {{"dimension", op.grid->dimension()},
                 {"extent", op.grid->extent()},
                 {"step", op.grid->step()}};
  }
  if (op.backend == Backend::gabor)
    j["window"] = {{"type", "gaussian"}, {"l2_norm", 1.0}};
  auto out = open_out(sidecar_json);
  out << j.dump(2) << '\n';
}

template <typename Scalar>
DiscreteOperator<Scalar> load_operator(
    const std::filesystem::path& matrix_csv,
    const std::filesystem::path& sidecar_json) {
  std::ifstream in(sidecar_json);
  if (!in)
    throw std::runtime_error("cannot open for reading: " +
                             sidecar_json.string());
  json j = json::parse(in);
  if (j.at("scalar").get<std::string>() !=
      detail::scalar_name<Scalar>())
    throw std::runtime_error("load_operator: scalar type mismatch");

  DiscreteOperator<Scalar> op;
  const std::string b = j.at("backend").get<std::string>();
  op.backend = (b == "nystrom")  ? Backend::nystrom
               : (b == "dpss")   ? Backend::dpss
               : (b == "gabor")  ? Backend::gabor
                                 : throw std::runtime_error(
                                       "load_operator: unknown backend " + b);
  op.ambient_dim = j.at("ambient_dim").get<long>();
  op.set_indices = j.at("set_indices").get<std::vector<long>>();
  op.analytic_trace = j.at("analytic_trace").get<double>();
  op.weight = j.at("weight").get<double>();
  if (j.contains("grid"))
    op.grid = Grid(j["grid"].at("dimension").get<int>(),
                   j["grid"].at("extent").get<double>(),
                   j["grid"].at("step").get<double>());

  const auto rows = detail::read_csv(matrix_csv);
  const long k = static_cast<long>(rows.size());
  op.block.resize(k, k);
  for (long i = 0; i < k; ++i) {
    if constexpr (std::is_same_v<Scalar, double>) {
      if (static_cast<long>(rows[i].size()) != k)
        throw std::runtime_error("load_operator: ragged matrix csv");
      for (long c = 0; c < k; ++c) op.block(i, c) = rows[i][c];
    } else {
      if (static_cast<long>(rows[i].size()) != 2 * k)
        throw std::runtime_error("load_operator: ragged matrix csv");
      for (long c = 0; c < k; ++c)
        op.block(i, c) = Scalar(rows[i][2 * c], rows[i][2 * c + 1]);
    }
  }
  return op;
}

// ---- families ----

template <typename Scalar>
void write_family_matrix(const std::filesystem::path& matrix_csv,
                         const LocalizedFamily<Scalar>& fam) {
  auto out = open_out(matrix_csv);
  detail::write_matrix_csv(out, fam.vectors);
}

template <typename Scalar>
json family_manifest(const LocalizedFamily<Scalar>& fam) {
  json j;
  j["epsilon"] = fam.params.epsilon;
  j["sigma"] = fam.params.sigma;
  j["gamma"] = fam.params.gamma;
  j["n"] = fam.params.n;
  j["multiplier"] = fam.params.multiplier();
  j["block_count"] = fam.block_count;
  j["residual_count"] = fam.residual_count;
  j["source_count"] = fam.source_count;
  j["size"] = fam.size();
  j["max_residual"] = fam.max_residual();
  if (!fam.diagnostic.empty()) j["diagnostic"] = fam.diagnostic;
  std::vector<double> resid(fam.residuals.data(),
                            fam.residuals.data() + fam.residuals.size());
  j["residuals"] = resid;
  return j;
}

template <typename Scalar>
void write_family(const std::filesystem::path& matrix_csv,
                  const std::filesystem::path& manifest_json,
                  const LocalizedFamily<Scalar>& fam) {
  write_family_matrix(matrix_csv, fam);
  auto out = open_out(manifest_json);
  out << family_manifest(fam).dump(2) << '\n';
}

// ---- sweeps ----

inline void write_sweep_csv(const std::filesystem::path& p,
                            const SweepResult& sweep,
                            bool with_family = false) {
  auto out = open_out(p);
  out << "scale,count_above,plunge,trace,density";
  if (with_family) out << ",family_size,upper_bound";
  out << '\n';
  for (const auto& e : sweep.entries) {
    out << g17(e.scale) << ',' << e.count_above << ',' << e.plunge << ','
        << g17(e.trace) << ',' << g17(e.density);
    if (with_family) out << ',' << e.family_size << ',' << g17(e.upper_bound);
    out << '\n';
  }
}

inline json sweep_json(const SweepResult& sweep, bool with_family = false) {
  json j;
  j["reference_density"] = sweep.reference_density;
  j["scale_exponent"] = sweep.scale_exponent;
  j["fitted_log_coefficient"] = sweep.fitted_log_coefficient;
  j["fit_relative_residual"] = sweep.fit_relative_residual;
  j["entries"] = json::array();
  for (const auto& e : sweep.entries) {
    json je = {{"scale", e.scale},         {"count_above", e.count_above},
               {"plunge", e.plunge},       {"trace", e.trace},
               {"density", e.density}};
    if (with_family) {
      je["family_size"] = e.family_size;
      je["upper_bound"] = e.upper_bound;
      je["sandwich_ok"] =
          static_cast<double>(e.family_size) <= e.upper_bound;
    }
    j["entries"].push_back(je);
  }
  return j;
}

}  // namespace nyqlab::io
