#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nyqlab/family.hpp"
#include "nyqlab/spectral.hpp"

// Eigenvalue counting M_r(gamma), plunge-region widths, dilation sweeps and
// the finite-dimensional upper bound on the size of any eps-localized
// orthonormal family. The o(r^d) terms of the asymptotic statements appear
// here as measured plunge counts and their least-squares log fit.

namespace nyqlab {

// #{k : lambda_k >= gamma}
template <typename Scalar>
int count_above(const Spectrum<Scalar>& spec, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("count_above: gamma must lie in (0,1)");
  int c = 0;
  for (long i = 0; i < spec.size(); ++i)
    if (spec.values[i] >= gamma) ++c;
  return c;
}

// #{k : delta < lambda_k < 1 - delta}
template <typename Scalar>
int plunge_width(const Spectrum<Scalar>& spec, double delta) {
  if (!(delta > 0.0 && delta < 0.5))
    throw std::invalid_argument("plunge_width: delta must lie in (0, 1/2)");
  int c = 0;
  for (long i = 0; i < spec.size(); ++i)
    if (spec.values[i] > delta && spec.values[i] < 1.0 - delta) ++c;
  return c;
}

// trace/(1-2eps) + plunge/delta: the finite-scale exclusion bound. Any
// orthonormal family with localization residual at most eps has at most
// this many members.
template <typename Scalar>
double upper_bound_certificate(const Spectrum<Scalar>& spec, double eps,
                               double delta) {
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument(
        "upper_bound_certificate: eps must lie in (0, 1/2)");
  const int plunge = plunge_width(spec, delta);  // validates delta
  return spec.sum_values() / (1.0 - 2.0 * eps) +
         static_cast<double>(plunge) / delta;
}

struct SweepEntry {
  double scale = 0.0;       // N for dpss, r otherwise
  int count_above = 0;
  int plunge = 0;
  double trace = 0.0;
  double density = 0.0;     // count_above / scale^exponent
  // filled when the sweep also constructs families:
  long family_size = -1;
  double upper_bound = 0.0;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  double fitted_log_coefficient = 0.0;  // slope of plunge vs log(scale)
  double fit_relative_residual = 0.0;
  double reference_density = 0.0;
  int scale_exponent = 1;               // d, or 2d for plane operators
};

namespace detail {

// Ordinary least squares y ~ a + b log(x); returns (b, rel residual).
inline std::pair<double, double> log_fit(const std::vector<double>& x,
                                         const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    sx += lx[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (y[i] - my);
  }
  const double b = (sxx > 0.0) ? sxy / sxx : 0.0;
  const double a = my - b * mx;
  double ss_res = 0, ss_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (a + b * lx[i]);
    ss_res += r * r;
    ss_y += y[i] * y[i];
  }
  const double rel = (ss_y > 0.0) ? std::sqrt(ss_res / ss_y) : 0.0;
  return {b, rel};
}

}  // namespace detail

// One sweep over increasing scales. The caller supplies the per-scale
// operator factory; this routine decomposes, counts, optionally constructs
// the family, re-checks the trace identity and verifies the sweep
// invariants (density convergence, nondecreasing sublinear plunge counts).
template <typename Scalar>
SweepResult run_sweep(
    const std::vector<double>& scales,
    const std::function<DiscreteOperator<Scalar>(double)>& build,
    double gamma, double delta, double reference_density, int scale_exponent,
    const FamilyParams* family_params = nullptr) {
  if (scales.size() < 3)
    throw std::invalid_argument("run_sweep: need at least 3 scales");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (!(scales[i] > scales[i - 1]))
      throw std::invalid_argument("run_sweep: scales must be increasing");

  SweepResult result;
  result.reference_density = reference_density;
  result.scale_exponent = scale_exponent;

  for (double s : scales) {
    try {
      const DiscreteOperator<Scalar> op = build(s);
      const Spectrum<Scalar> spec = eigendecompose(op);

      SweepEntry e;
      e.scale = s;
      e.count_above = count_above(spec, gamma);
      e.plunge = plunge_width(spec, delta);
      e.trace = spec.sum_values();
      double vol = 1.0;
      for (int a = 0; a < scale_exponent; ++a) vol *= s;
      e.density = static_cast<double>(e.count_above) / vol;

      const double trace_tol =
          std::max(op.trace_tolerance,
                   1e-9 * std::max(1.0, std::abs(op.analytic_trace)));
      if (std::abs(e.trace - op.analytic_trace) > trace_tol)
        throw std::runtime_error("trace deviates from the analytic target");
      if (std::abs(e.trace - op.numeric_trace()) >
          1e-9 * std::max(1.0, std::abs(e.trace)))
        throw std::runtime_error("eigenvalue sum deviates from the trace");

      if (family_params) {
        const auto fam = construct_family(spec, op, *family_params);
        e.family_size = fam.size();
        e.upper_bound = upper_bound_certificate(spec, family_params->epsilon,
                                                delta);
        if (static_cast<double>(e.family_size) > e.upper_bound)
          throw std::runtime_error(
              "constructed family exceeds the upper-bound certificate");
      }
      result.entries.push_back(e);
    } catch (const std::exception& ex) {
      throw std::runtime_error("run_sweep: scale " + std::to_string(s) +
                               ": " + ex.what());
    }
  }

  std::vector<double> xs, ys;
  for (const auto& e : result.entries) {
    xs.push_back(e.scale);
    ys.push_back(static_cast<double>(e.plunge));
  }
  const auto [coef, rel] = detail::log_fit(xs, ys);
  result.fitted_log_coefficient = coef;
  result.fit_relative_residual = rel;

  // sweep invariants
  const auto& es = result.entries;
  const double dev_first = std::abs(es.front().density - reference_density);
  const double dev_last = std::abs(es.back().density - reference_density);
  if (dev_last > dev_first)
    throw std::runtime_error("run_sweep: densities do not converge");
  for (std::size_t i = 1; i < es.size(); ++i) {
    if (es[i].plunge < es[i - 1].plunge)
      throw std::runtime_error("run_sweep: plunge counts not nondecreasing");
    const double va = static_cast<double>(es[i - 1].plunge) /
                      std::pow(es[i - 1].scale, scale_exponent);
    const double vb = static_cast<double>(es[i].plunge) /
                      std::pow(es[i].scale, scale_exponent);
    if (vb > va + 1e-12)
      throw std::runtime_error("run_sweep: plunge growth not sublinear");
  }
  return result;
}

}  // namespace nyqlab
