#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>

#include "nyqlab/setgeom.hpp"
#include "nyqlab/timeband.hpp"

// Gabor localization on the time-frequency plane: the short-time Fourier
// transform with the unit-norm Gaussian window, the reproducing kernel of
// the Gabor space in closed form, the discretized operator D_{rS} P_g D_{rS}
// and an independent Hermite-function quadrature oracle for its spectrum
// when S is a centered disk.
//
// Conventions: V_g f(x,xi) = int f(t) conj(g(t-x)) e^{-2 pi i xi t} dt and
// g(t) = 2^{1/4} e^{-pi t^2}, so that K_g(z,z) = 1 and |V_g h_k(z)|^2 is a
// radial function of z.

namespace nyqlab {

struct GaussianWindow {
  double eval(double t) const {
    return std::pow(2.0, 0.25) * std::exp(-std::numbers::pi * t * t);
  }
};

// K_g(z,w) = <pi_z g, pi_w g>
//          = exp(-pi |z-w|^2 / 2) * exp(i pi (xi - eta)(x + y))
// for z = (x, xi), w = (y, eta).
inline std::complex<double> gabor_kernel(const std::array<double, 2>& z,
                                         const std::array<double, 2>& w) {
  const double dx = z[0] - w[0];
  const double dxi = z[1] - w[1];
  const double mod =
      std::exp(-0.5 * std::numbers::pi * (dx * dx + dxi * dxi));
  const double phase = std::numbers::pi * dxi * (z[0] + w[0]);
  return std::polar(mod, phase);
}

// Short-time Fourier transform of a time-grid vector, evaluated at the nodes
// of the time-frequency grid: V_g f(x,xi) = w_t sum_t f(t) g(t-x) e^{-2pi i xi t}.
// The time step must resolve the largest frequency of the tf grid
// (1/(2 h_t) >= xi_max), otherwise the discrete sum aliases.
inline Eigen::VectorXcd stft(const Eigen::VectorXd& f, const Grid& time_grid,
                             const GaussianWindow& window, const Grid& tf) {
  if (time_grid.dimension() != 1 || tf.dimension() != 2)
    throw std::invalid_argument("stft: need a 1-d time grid and a 2-d tf grid");
  if (f.size() != time_grid.total_nodes())
    throw std::invalid_argument("stft: f does not match the time grid");
  if (0.5 / time_grid.step() < tf.extent())
    throw std::invalid_argument(
        "stft: time grid too coarse for the frequency extent of the tf grid");

  const long nt = time_grid.total_nodes();
  const double wt = time_grid.weight();
  double norm2 = 0.0;
  for (long i = 0; i < nt; ++i) {
    const double gv = window.eval(time_grid.axis_coord(i));
    norm2 += wt * gv * gv;
  }
  if (std::abs(norm2 - 1.0) > 1e-8)
    throw std::invalid_argument("stft: window is not unit norm on this grid");

  Eigen::VectorXcd out(tf.total_nodes());
  for (long i = 0; i < tf.total_nodes(); ++i) {
    const auto z = tf.node(i);
    std::complex<double> acc = 0.0;
    for (long t = 0; t < nt; ++t) {
      const double tv = time_grid.axis_coord(t);
      acc += f[t] * window.eval(tv - z[0]) *
             std::polar(1.0, -2.0 * std::numbers::pi * z[1] * tv);
    }
    out[i] = wt * acc;
  }
  return out;
}

// D_{rS} P_g D_{rS} on the time-frequency grid: entries w conj(K_g(z_i,z_j))
// over the nodes of rS, Hermitian by construction, with analytic trace
// |rS| because K_g(z,z) = 1.
inline ComplexOperator build_gabor_operator(const SetSpec& s, const Grid& tf,
                                            double r) {
  if (s.dimension() != 2 || tf.dimension() != 2)
    throw std::invalid_argument(
        "build_gabor_operator: plane sets and grids must be 2-dimensional");
  const SetSpec rs = dilate(s, r);
  const NodeSelection sel = select_nodes(rs, tf);

  ComplexOperator op;
  op.backend = Backend::gabor;
  op.grid = tf;
  op.ambient_dim = tf.total_nodes();
  op.set_indices = sel.inside;
  op.weight = tf.weight();
  op.analytic_trace = measure(rs);
  op.trace_tolerance = boundary_size(rs) * tf.step();

  const long k = op.set_size();
  std::vector<std::array<double, 2>> z(k);
  for (long i = 0; i < k; ++i) {
    const auto pt = tf.node(sel.inside[i]);
    z[i] = {pt[0], pt[1]};
  }

  Eigen::MatrixXcd m(k, k);
  for (long i = 0; i < k; ++i) {
    m(i, i) = op.weight;
    for (long j = 0; j < i; ++j) {
      m(i, j) = op.weight * std::conj(gabor_kernel(z[i], z[j]));
      m(j, i) = std::conj(m(i, j));
    }
  }
  op.block = 0.5 * (m + m.adjoint().eval());
  return op;
}

// k-th unit-norm Hermite function h_k(t) under the pi-convention
// (h_0 = 2^{1/4} e^{-pi t^2}), by the stable forward recurrence
// h_{k+1}(t) = sqrt(4 pi/(k+1)) t h_k(t) - sqrt(k/(k+1)) h_{k-1}(t).
inline double hermite_value(int k, double t) {
  double hm = 0.0;
  double h = std::pow(2.0, 0.25) * std::exp(-std::numbers::pi * t * t);
  for (int j = 0; j < k; ++j) {
    const double hn =
        std::sqrt(4.0 * std::numbers::pi / (j + 1)) * t * h -
        std::sqrt(static_cast<double>(j) / (j + 1)) * hm;
    hm = h;
    h = hn;
  }
  return h;
}

// Independent eigenvalue oracle for the disk: lambda_k = int_{|z|<=R}
// |V_g h_k(z)|^2 dz, evaluated without assembling any matrix. The STFT
// modulus of a Hermite function is radial, so the integral reduces to
// 2 pi int_0^R |V_g h_k(r,0)|^2 r dr; V_g h_k(r,0) is itself a 1-d integral
// of h_k against the shifted window.
inline double hermite_oracle(int k, double radius) {
  if (k < 0) throw std::invalid_argument("hermite_oracle: k must be >= 0");
  if (radius < 0.0)
    throw std::invalid_argument("hermite_oracle: radius must be >= 0");
  const GaussianWindow window;
  const double ht = 1.0 / 128.0;      // time quadrature step
  const double half_span = 8.0;
  const int nr = 4096;                // radial quadrature points
  const double hr = radius / nr;

  double acc = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * hr;
    // V_g h_k(r, 0) = int h_k(t) g(t - r) dt around the overlap center r/2
    const double c = 0.5 * r;
    const long m = static_cast<long>(std::ceil(2.0 * half_span / ht));
    double v = 0.0;
    for (long t = 0; t < m; ++t) {
      const double tv = c - half_span + (t + 0.5) * ht;
      v += hermite_value(k, tv) * window.eval(tv - r);
    }
    v *= ht;
    acc += v * v * r * hr;
  }
  return 2.0 * std::numbers::pi * acc;
}

inline double hermite_oracle(int k, const SetSpec& s) {
  if (!s.boxes().empty() || s.disks().size() != 1 ||
      s.disks()[0].center[0] != 0.0 || s.disks()[0].center[1] != 0.0)
    throw std::invalid_argument("hermite_oracle: S must be a centered disk");
  return hermite_oracle(k, s.disks()[0].radius);
}

}  // namespace nyqlab
