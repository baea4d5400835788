#pragma once

#include <Eigen/Dense>
#include <complex>

#include "nyqlab/timeband.hpp"

// Symmetric eigendecomposition of the set-restricted operator block, with
// the invariants of the decomposition verified before anything is returned:
// nonincreasing eigenvalues, orthonormal eigenvectors, bounded residuals.
// Also the pseudospectral measurements: localization residuals and the
// Donoho-Stark epsilon-concentration checks.

namespace nyqlab {

namespace detail {

// Deterministic sign convention: the entry of largest magnitude (first such
// index on ties) is made positive, or real positive in the complex case.
inline void fix_column_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index imax = 0;
  double best = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      imax = i;
    }
  if (v[imax] < 0.0) v = -v;
}

inline void fix_column_sign(Eigen::Ref<Eigen::VectorXcd> v) {
  Eigen::Index imax = 0;
  double best = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      imax = i;
    }
  if (best > 0.0) v *= std::conj(v[imax]) / std::abs(v[imax]);
}

// Dense symmetric eigensolve (tridiagonalization + implicit-shift QL via
// Eigen), returned in nonincreasing order with the sign convention applied.
inline void sym_eigen_descending(const Eigen::MatrixXd& a,
                                 Eigen::VectorXd& values,
                                 Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_eigen: eigensolver did not converge");
  const Eigen::Index k = a.rows();
  values = es.eigenvalues().reverse();
  vectors.resize(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    vectors.col(j) = es.eigenvectors().col(k - 1 - j);
    fix_column_sign(vectors.col(j));
  }
}

}  // namespace detail

template <typename Scalar>
struct Spectrum {
  Eigen::VectorXd values;                // nonincreasing
  Eigen::MatrixX<Scalar> block_vectors;  // |set| x count, orthonormal columns
  std::vector<long> set_indices;
  long ambient_dim = 0;
  double weight = 1.0;
  double residual_bound = 0.0;

  long size() const { return values.size(); }

  // Eigenvector embedded into the ambient space (zeros off the set) and
  // normalized under the backend inner product <f,g> = w sum f conj(g).
  Eigen::VectorX<Scalar> ambient_vector(long k) const {
    Eigen::VectorX<Scalar> f = Eigen::VectorX<Scalar>::Zero(ambient_dim);
    const double s = 1.0 / std::sqrt(weight);
    for (std::size_t i = 0; i < set_indices.size(); ++i)
      f[set_indices[i]] = block_vectors(static_cast<long>(i), k) * s;
    return f;
  }

  double sum_values() const { return values.sum(); }
  double sum_squares() const { return values.squaredNorm(); }
};

using RealSpectrum = Spectrum<double>;
using ComplexSpectrum = Spectrum<std::complex<double>>;

namespace detail {

template <typename Scalar>
void verify_spectrum(const Eigen::MatrixX<Scalar>& block,
                     Spectrum<Scalar>& spec) {
  const long k = spec.size();
  if (k == 0) return;
  const double scale = 1.0 + std::abs(spec.values[0]);

  const Eigen::MatrixX<Scalar> gram =
      spec.block_vectors.adjoint() * spec.block_vectors;
  const double gram_err =
      (gram - Eigen::MatrixX<Scalar>::Identity(k, k)).cwiseAbs().maxCoeff();
  if (gram_err > 1e-8)
    throw std::runtime_error("eigendecompose: eigenvector orthonormality "
                             "defect above tolerance");

  const Eigen::MatrixX<Scalar> resid =
      block * spec.block_vectors -
      spec.block_vectors * spec.values.asDiagonal();
  spec.residual_bound = resid.colwise().norm().maxCoeff();
  if (spec.residual_bound > 1e-8 * scale)
    throw std::runtime_error("eigendecompose: eigenpair residual above "
                             "tolerance");
}

}  // namespace detail

// Full decomposition of the set-restricted block of a real symmetric
// operator. Deterministic for a fixed input.
inline RealSpectrum eigendecompose(const RealOperator& op) {
  const double asym = (op.block - op.block.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12)
    throw std::invalid_argument("eigendecompose: operator block not symmetric");

  RealSpectrum spec;
  spec.set_indices = op.set_indices;
  spec.ambient_dim = op.ambient_dim;
  spec.weight = op.weight;
  detail::sym_eigen_descending(op.block, spec.values, spec.block_vectors);
  detail::verify_spectrum<double>(op.block, spec);
  return spec;
}

// Complex Hermitian decomposition via the standard real embedding
// [[A, -B], [B, A]] of M = A + iB: a real symmetric 2k x 2k problem whose
// eigenvalues are those of M, each doubled. The doubled pairs are removed
// deterministically and one complex eigenvector is lifted per pair.
inline ComplexSpectrum eigendecompose(const ComplexOperator& op) {
  const double asym = (op.block - op.block.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12)
    throw std::invalid_argument("eigendecompose: operator block not Hermitian");

  const long k = op.set_size();
  Eigen::MatrixXd embed(2 * k, 2 * k);
  embed.topLeftCorner(k, k) = op.block.real();
  embed.bottomRightCorner(k, k) = op.block.real();
  embed.topRightCorner(k, k) = -op.block.imag();
  embed.bottomLeftCorner(k, k) = op.block.imag();

  Eigen::VectorXd evals;
  Eigen::MatrixXd evecs;
  detail::sym_eigen_descending(embed, evals, evecs);

  const double scale = (k > 0) ? 1.0 + std::abs(evals[0]) : 1.0;

  ComplexSpectrum spec;
  spec.set_indices = op.set_indices;
  spec.ambient_dim = op.ambient_dim;
  spec.weight = op.weight;
  spec.values.resize(k);
  spec.block_vectors.resize(k, k);

  // Walk the doubled list one near-degenerate group at a time. Lifting
  // (u; v) -> u + iv halves each group: the J-rotated partner of a lifted
  // vector is the same complex vector up to phase, so a greedy pass with
  // Gram-Schmidt against the group picks out one complex eigenvector per
  // pair and discards the redundant partners.
  long out = 0;
  long p = 0;
  while (p < 2 * k) {
    long q = p + 1;
    while (q < 2 * k && std::abs(evals[q] - evals[q - 1]) <= 1e-10 * scale)
      ++q;
    if ((q - p) % 2 != 0)
      throw std::runtime_error(
          "eigendecompose: embedded eigenvalues failed to pair");
    const long m = (q - p) / 2;
    for (long t = 0; t < m; ++t) {
      if (std::abs(evals[p + 2 * t] - evals[p + 2 * t + 1]) > 1e-7 * scale)
        throw std::runtime_error(
            "eigendecompose: embedded eigenvalues failed to pair");
      spec.values[out + t] = evals[p + 2 * t];
    }
    long accepted = 0;
    for (long cand = p; cand < q && accepted < m; ++cand) {
      Eigen::VectorXcd z =
          evecs.col(cand).head(k) +
          std::complex<double>(0, 1) * evecs.col(cand).tail(k);
      if (accepted > 0) {
        const auto v = spec.block_vectors.middleCols(out, accepted);
        z -= v * (v.adjoint() * z).eval();
        z -= v * (v.adjoint() * z).eval();  // re-orthogonalize once
      }
      const double nz = z.norm();
      if (nz > 1e-3) {
        spec.block_vectors.col(out + accepted) = z / nz;
        ++accepted;
      }
    }
    if (accepted < m)
      throw std::runtime_error(
          "eigendecompose: could not lift independent complex eigenvectors");
    out += m;
    p = q;
  }

  // Adjacent groups with small gaps leave cross terms of size eps/gap in the
  // complex Gram matrix; a final unitary polish removes them while moving
  // each vector only within the corresponding near-invariant subspace.
  if (k > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(spec.block_vectors);
    spec.block_vectors =
        qr.householderQ() * Eigen::MatrixXcd::Identity(k, k);
    for (long j = 0; j < k; ++j)
      detail::fix_column_sign(spec.block_vectors.col(j));
  }

  detail::verify_spectrum<std::complex<double>>(op.block, spec);
  return spec;
}

// ||P f - f||^2 under the backend inner product, for unit f. This is the
// epsilon-localization defect: f satisfies the localization constraint with
// budget eps iff the returned value is at most eps.
template <typename Scalar>
double localization_residual(const DiscreteOperator<Scalar>& op,
                             const Eigen::VectorX<Scalar>& f) {
  if (std::abs(op.norm(f) - 1.0) > 1e-10)
    throw std::invalid_argument("localization_residual: f must be unit norm");
  const double r = op.norm(apply(op, f) - f);
  return r * r;
}

// true iff ||L f - lambda f|| <= eps: f is an eps-approximated eigenfunction
// of L corresponding to lambda.
template <typename Scalar>
bool pseudo_eigen_check(const DiscreteOperator<Scalar>& op,
                        const Eigen::VectorX<Scalar>& f, double lambda,
                        double eps) {
  if (std::abs(op.norm(f) - 1.0) > 1e-10)
    throw std::invalid_argument("pseudo_eigen_check: f must be unit norm");
  return op.norm(apply(op, f) - lambda * f) <= eps;
}

struct ConcentrationReport {
  double eps_T = 0.0;      // ||D_T f - f||
  double eps_Omega = 0.0;  // ||B_Omega f - f||
  double residual = 0.0;   // ||P_{T,Omega} f - f||
};

// Donoho-Stark chain on the full grid: mask for D_T, the discretized band
// matrix for B_Omega, and their sandwich for P. The triangle-inequality
// bound residual <= 2 eps_T + eps_Omega is checked before returning.
inline ConcentrationReport donoho_stark_check(const SetSpec& T,
                                              const BandSpec& band,
                                              const Grid& g,
                                              const Eigen::VectorXd& f) {
  const double w = g.weight();
  const double nf = std::sqrt(w) * f.norm();
  if (std::abs(nf - 1.0) > 1e-10)
    throw std::invalid_argument("donoho_stark_check: f must be unit norm");

  const NodeSelection sel = select_nodes(T, g);
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(g.total_nodes());
  for (long i : sel.inside) mask[i] = 1.0;

  const Eigen::MatrixXd b = full_band_matrix(band, g);
  const Eigen::VectorXd df = mask.cwiseProduct(f);
  const Eigen::VectorXd bf = b * f;
  const Eigen::VectorXd pf = mask.cwiseProduct(b * df);

  ConcentrationReport rep;
  rep.eps_T = std::sqrt(w) * (df - f).norm();
  rep.eps_Omega = std::sqrt(w) * (bf - f).norm();
  rep.residual = std::sqrt(w) * (pf - f).norm();
  if (rep.residual > 2.0 * rep.eps_T + rep.eps_Omega + 1e-8)
    throw std::runtime_error(
        "donoho_stark_check: triangle inequality violated");
  return rep;
}

}  // namespace nyqlab
