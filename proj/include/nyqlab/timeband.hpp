#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include "nyqlab/setgeom.hpp"

// The time- and band-limiting operator P_{rT,Omega} = D_{rT} B_Omega D_{rT}
// in two discrete realizations:
//
//   nystrom : midpoint quadrature of the explicit convolution kernel
//             k(u) = (2pi)^{-d} \int_Omega e^{i u.xi} dxi
//             restricted to the grid nodes of rT,
//   dpss    : the N x N prolate matrix sin(2πW(m-n))/(π(m-n)), the exact
//             discrete analogue where the trace and projection structure
//             hold without quadrature error.
//
// Both are stored as the dense set-restricted block plus the ambient index
// map; rows and columns off the set are identically zero by representation.

namespace nyqlab {

enum class Backend { nystrom, dpss, gabor };

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::nystrom: return "nystrom";
    case Backend::dpss: return "dpss";
    case Backend::gabor: return "gabor";
  }
  return "?";
}

template <typename Scalar>
struct DiscreteOperator {
  Backend backend = Backend::dpss;
  long ambient_dim = 0;
  std::vector<long> set_indices;            // sorted ascending
  Eigen::MatrixX<Scalar> block;             // |set| x |set|
  std::optional<Grid> grid;                 // absent for the dpss backend
  double analytic_trace = 0.0;
  // how far the numeric trace may sit from analytic_trace: zero for exact
  // backends, the node-counting bound boundary_size * h for quadrature ones
  double trace_tolerance = 0.0;
  double weight = 1.0;                      // inner product <f,g> = w * sum f conj(g)

  long set_size() const { return static_cast<long>(set_indices.size()); }

  double numeric_trace() const { return block.real().trace(); }

  // ambient matrix entry; zero off the set block
  Scalar entry(long i, long j) const {
    const long bi = block_index(i), bj = block_index(j);
    if (bi < 0 || bj < 0) return Scalar(0);
    return block(bi, bj);
  }

  long block_index(long ambient) const {
    auto it = std::lower_bound(set_indices.begin(), set_indices.end(), ambient);
    if (it == set_indices.end() || *it != ambient) return -1;
    return static_cast<long>(it - set_indices.begin());
  }

  Eigen::VectorX<Scalar> restrict_to_set(const Eigen::VectorX<Scalar>& f) const {
    Eigen::VectorX<Scalar> r(set_size());
    for (long k = 0; k < set_size(); ++k) r[k] = f[set_indices[k]];
    return r;
  }

  Eigen::VectorX<Scalar> embed_from_set(const Eigen::VectorX<Scalar>& r) const {
    Eigen::VectorX<Scalar> f = Eigen::VectorX<Scalar>::Zero(ambient_dim);
    for (long k = 0; k < set_size(); ++k) f[set_indices[k]] = r[k];
    return f;
  }

  double norm(const Eigen::VectorX<Scalar>& f) const {
    return std::sqrt(weight) * f.norm();
  }
};

using RealOperator = DiscreteOperator<double>;
using ComplexOperator = DiscreteOperator<std::complex<double>>;

// Matrix-vector product in the ambient space: D_{set} B D_{set} f.
template <typename Scalar>
Eigen::VectorX<Scalar> apply(const DiscreteOperator<Scalar>& op,
                             const Eigen::VectorX<Scalar>& f) {
  if (f.size() != op.ambient_dim)
    throw std::invalid_argument("apply: vector length does not match ambient_dim");
  return op.embed_from_set(op.block * op.restrict_to_set(f));
}

// Frequency set Omega (finite box union, symmetric about the origin) with its
// band-limiting convolution kernel in closed form.
class BandSpec {
 public:
  explicit BandSpec(SetSpec omega) : m_omega(std::move(omega)) {
    if (!m_omega.disks().empty())
      throw std::invalid_argument("BandSpec: frequency sets must be box unions");
    check_symmetric();
  }

  static BandSpec centered_band(double halfwidth) {
    return BandSpec(SetSpec::interval(-halfwidth, halfwidth, "band"));
  }

  const SetSpec& omega() const { return m_omega; }
  int dimension() const { return m_omega.dimension(); }

  // k(u) = (2pi)^{-d} \int_Omega e^{i u.xi} dxi. Per box this factors into
  // per-axis terms (e^{i u b} - e^{i u a})/(i u), with the removable
  // singularity at u = 0 evaluated analytically as (b - a). The imaginary
  // parts cancel over the symmetric union; the real part is returned.
  double kernel(const std::vector<double>& u) const {
    const int d = m_omega.dimension();
    std::complex<double> sum = 0.0;
    for (const auto& box : m_omega.boxes()) {
      std::complex<double> prod = 1.0;
      for (int a = 0; a < d; ++a) {
        const double lo = box.sides[a][0], hi = box.sides[a][1];
        prod *= axis_factor(u[a], lo, hi);
      }
      sum += prod;
    }
    double scale = 1.0;
    for (int a = 0; a < d; ++a) scale *= 2.0 * std::numbers::pi;
    return sum.real() / scale;
  }

 private:
  static std::complex<double> axis_factor(double u, double lo, double hi) {
    if (u == 0.0) return {hi - lo, 0.0};
    const std::complex<double> iu(0.0, u);
    return (std::exp(iu * hi) - std::exp(iu * lo)) / iu;
  }

  // Rejects Omega that is not symmetric about the origin: the kernel would be
  // complex Hermitian and the real symmetric eigensolving contract would not
  // apply. Every box must have its reflection -box in the union.
  void check_symmetric() const {
    constexpr double tol = 1e-12;
    for (const auto& b : m_omega.boxes()) {
      bool found = false;
      for (const auto& c : m_omega.boxes()) {
        bool match = true;
        for (int a = 0; a < m_omega.dimension(); ++a)
          if (std::abs(b.sides[a][0] + c.sides[a][1]) > tol ||
              std::abs(b.sides[a][1] + c.sides[a][0]) > tol) {
            match = false;
            break;
          }
        if (match) {
          found = true;
          break;
        }
      }
      if (!found)
        throw std::invalid_argument(
            "BandSpec: Omega must be symmetric about the origin "
            "(complex Hermitian kernels are not supported)");
    }
  }

  SetSpec m_omega;
};

// Nystrom discretization of D_{rT} B_Omega D_{rT}: entry (i,j) = w k(x_i-x_j)
// for nodes x_i, x_j in rT. The analytic trace target is
// (2pi)^{-d} |rT| |Omega|, the Nyquist count of the region.
inline RealOperator build_nystrom(const SetSpec& T, const BandSpec& band,
                                  const Grid& g, double r) {
  if (T.dimension() != band.dimension() || T.dimension() != g.dimension())
    throw std::invalid_argument("build_nystrom: dimension mismatch");
  if (!T.disks().empty())
    throw std::invalid_argument("build_nystrom: time sets must be box unions");
  const SetSpec rT = dilate(T, r);
  const NodeSelection sel = select_nodes(rT, g);

  RealOperator op;
  op.backend = Backend::nystrom;
  op.grid = g;
  op.ambient_dim = g.total_nodes();
  op.set_indices = sel.inside;
  op.weight = g.weight();

  const long k = op.set_size();
  const int d = g.dimension();
  std::vector<std::vector<double>> coords(k);
  for (long i = 0; i < k; ++i) coords[i] = g.node(sel.inside[i]);

  Eigen::MatrixXd m(k, k);
  std::vector<double> u(d);
  for (long i = 0; i < k; ++i)
    for (long j = 0; j <= i; ++j) {
      for (int a = 0; a < d; ++a) u[a] = coords[i][a] - coords[j][a];
      m(i, j) = op.weight * band.kernel(u);
    }
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  op.block = 0.5 * (m + m.transpose());

  double two_pi_d = 1.0;
  for (int a = 0; a < d; ++a) two_pi_d *= 2.0 * std::numbers::pi;
  op.analytic_trace = measure(rT) * measure(band.omega()) / two_pi_d;
  op.trace_tolerance =
      boundary_size(rT) * g.step() * measure(band.omega()) / two_pi_d;
  return op;
}

// Band-limiting matrix w k(x_i - x_j) over the whole grid, no time cutoff.
// Used by the Donoho-Stark concentration checks, where B_Omega acts on
// vectors that are not supported on the time set.
inline Eigen::MatrixXd full_band_matrix(const BandSpec& band, const Grid& g) {
  if (band.dimension() != g.dimension())
    throw std::invalid_argument("full_band_matrix: dimension mismatch");
  const long n = g.total_nodes();
  const int d = g.dimension();
  const double w = g.weight();
  Eigen::MatrixXd m(n, n);
  std::vector<double> u(d);
  for (long i = 0; i < n; ++i) {
    const auto xi = g.node(i);
    for (long j = 0; j <= i; ++j) {
      const auto xj = g.node(j);
      for (int a = 0; a < d; ++a) u[a] = xi[a] - xj[a];
      m(i, j) = w * band.kernel(u);
    }
  }
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  return 0.5 * (m + m.transpose());
}

// The N x N prolate (DPSS) matrix sin(2πW(m-n))/(π(m-n)) with diagonal 2W,
// padded to ambient_dim so the family construction has kernel coordinates to
// draw on. ambient_dim = 0 selects the default padding N + max(32, N/2).
inline RealOperator build_dpss(int N, double W, long ambient_dim = 0) {
  if (N < 1) throw std::invalid_argument("build_dpss: N must be positive");
  if (!(W > 0.0 && W < 0.5))
    throw std::invalid_argument("build_dpss: W must lie in (0, 1/2)");
  if (ambient_dim == 0) ambient_dim = N + std::max<long>(32, N / 2);
  if (ambient_dim < N)
    throw std::invalid_argument("build_dpss: ambient_dim must be >= N");

  RealOperator op;
  op.backend = Backend::dpss;
  op.ambient_dim = ambient_dim;
  op.set_indices.resize(N);
  for (int i = 0; i < N; ++i) op.set_indices[i] = i;
  op.weight = 1.0;
  op.analytic_trace = 2.0 * N * W;

  Eigen::MatrixXd m(N, N);
  for (int i = 0; i < N; ++i) {
    m(i, i) = 2.0 * W;
    for (int j = 0; j < i; ++j) {
      const double x = static_cast<double>(i - j);
      m(i, j) = std::sin(2.0 * std::numbers::pi * W * x) /
                (std::numbers::pi * x);
      m(j, i) = m(i, j);
    }
  }
  op.block = 0.5 * (m + m.transpose());
  return op;
}

}  // namespace nyqlab
