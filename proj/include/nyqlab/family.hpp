#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "nyqlab/spectral.hpp"

// Construction of the maximal eps-localized orthonormal family: n
// eigenvectors with eigenvalue above 1 - sigma are traded for n+1 orthonormal
// vectors by splitting their energy through an orthogonal matrix whose first
// column is flat, and topping each one up with a shared kernel vector. Every
// member Phi then satisfies ||P Phi - Phi||^2 <= sigma^2 + (1-sigma^2)/(n+1),
// which the parameter selection pins below eps.

namespace nyqlab {

struct FamilyParams {
  double epsilon = 0.0;
  double sigma = 0.0;    // threshold eigenvalue is 1 - sigma
  double gamma = 0.0;    // sigma^2 + (1 - sigma^2) gamma = epsilon
  int n = 0;             // block size: n <= 1/gamma <= n+1

  double multiplier() const {
    return static_cast<double>(n + 1) / static_cast<double>(n);
  }
};

// Solves sigma^2 + (1 - sigma^2) gamma = epsilon for gamma and picks the
// integer n with n <= 1/gamma <= n+1.
inline FamilyParams select_parameters(double epsilon, double sigma_sq) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument(
        "select_parameters: epsilon must lie in (0, 1/2)");
  if (!(sigma_sq > 0.0 && sigma_sq < epsilon))
    throw std::invalid_argument(
        "select_parameters: sigma^2 must lie in (0, epsilon)");
  FamilyParams p;
  p.epsilon = epsilon;
  p.sigma = std::sqrt(sigma_sq);
  p.gamma = (epsilon - sigma_sq) / (1.0 - sigma_sq);
  // n <= 1/gamma <= n+1; floor covers the integer case n = 1/gamma as well
  p.n = static_cast<int>(std::floor(1.0 / p.gamma));
  return p;
}

// Orthogonal m x m matrix whose first column is the flat unit vector
// v0 = (1/sqrt(m), ..., 1/sqrt(m)): the Householder reflector exchanging e1
// and v0. Symmetric, deterministic, orthogonal to machine precision.
inline Eigen::MatrixXd flat_completion(int m) {
  if (m < 2) throw std::invalid_argument("flat_completion: m must be >= 2");
  const double a = 1.0 / std::sqrt(static_cast<double>(m));
  Eigen::VectorXd u = Eigen::VectorXd::Constant(m, -a);
  u[0] += 1.0;  // u = e1 - v0
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(m, m);
  q -= (2.0 / u.squaredNorm()) * (u * u.transpose());
  return q;
}

// One block of the construction: n orthonormal eigenvectors and a unit kernel
// vector h orthogonal to them are combined into n+1 orthonormal vectors
//   psi_j = sum_k (u'_j)_k phi_k,     Phi_j = psi_j + h / sqrt(n+1),
// where u'_j is the j-th row of Q with its first entry dropped. The psi Gram
// is I - J/(n+1), so the flat h share restores exact orthonormality.
template <typename Scalar>
Eigen::MatrixX<Scalar> build_block(const Eigen::MatrixX<Scalar>& eigvecs,
                                   const Eigen::VectorX<Scalar>& h,
                                   const Eigen::MatrixXd& q,
                                   double weight = 1.0) {
  const long n = eigvecs.cols();
  if (q.rows() != n + 1 || q.cols() != n + 1)
    throw std::invalid_argument("build_block: Q must be (n+1) x (n+1)");

  const auto wdot = [&](const Eigen::VectorX<Scalar>& a,
                        const Eigen::VectorX<Scalar>& b) {
    return weight * b.dot(a);
  };
  constexpr double tol = 1e-8;
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j <= i; ++j) {
      const double expect = (i == j) ? 1.0 : 0.0;
      if (std::abs(wdot(eigvecs.col(i), eigvecs.col(j)) - Scalar(expect)) > tol)
        throw std::invalid_argument("build_block: eigenvectors not orthonormal");
    }
    if (std::abs(wdot(eigvecs.col(i), h)) > tol)
      throw std::invalid_argument("build_block: h not orthogonal to eigenvectors");
  }
  if (std::abs(wdot(h, h) - Scalar(1.0)) > tol)
    throw std::invalid_argument("build_block: h not unit norm");

  Eigen::MatrixX<Scalar> phi(eigvecs.rows(), n + 1);
  const double hshare = 1.0 / std::sqrt(static_cast<double>(n + 1));
  for (long j = 0; j < n + 1; ++j) {
    Eigen::VectorX<Scalar> psi = Eigen::VectorX<Scalar>::Zero(eigvecs.rows());
    for (long k = 0; k < n; ++k) psi += q(j, k + 1) * eigvecs.col(k);
    phi.col(j) = psi + hshare * h;
  }
  return phi;
}

template <typename Scalar>
struct LocalizedFamily {
  Eigen::MatrixX<Scalar> vectors;   // ambient_dim x size, orthonormal columns
  FamilyParams params;
  int block_count = 0;              // l
  int residual_count = 0;           // #F mod n, eigenfunctions left unused
  int source_count = 0;             // #F
  Eigen::VectorXd residuals;        // ||P Phi - Phi||^2 per vector
  std::string diagnostic;

  long size() const { return vectors.cols(); }
  double max_residual() const {
    return residuals.size() ? residuals.maxCoeff() : 0.0;
  }
};

// Runs the whole construction against a decomposed operator: F is the set of
// eigenvectors with eigenvalue strictly above 1 - sigma, split into l
// consecutive blocks of n in nonincreasing eigenvalue order; kernel vectors
// are off-set coordinate unit vectors, exactly annihilated by the operator.
// All family invariants are verified before returning.
template <typename Scalar>
LocalizedFamily<Scalar> construct_family(const Spectrum<Scalar>& spec,
                                         const DiscreteOperator<Scalar>& op,
                                         const FamilyParams& params) {
  LocalizedFamily<Scalar> fam;
  fam.params = params;

  int count_f = 0;
  while (count_f < spec.size() && spec.values[count_f] > 1.0 - params.sigma)
    ++count_f;
  fam.source_count = count_f;

  const int n = params.n;
  const int l = count_f / n;
  fam.block_count = l;
  fam.residual_count = count_f % n;

  if (l == 0) {
    fam.vectors.resize(op.ambient_dim, 0);
    fam.residuals.resize(0);
    fam.diagnostic =
        "no block can be formed: #F = " + std::to_string(count_f) +
        " < n = " + std::to_string(n);
    return fam;
  }

  // one off-set coordinate per block
  std::vector<long> kernel_coords;
  {
    std::size_t next = 0;
    for (long i = 0; i < op.ambient_dim &&
                     kernel_coords.size() < static_cast<std::size_t>(l);
         ++i) {
      while (next < op.set_indices.size() && op.set_indices[next] < i) ++next;
      if (next < op.set_indices.size() && op.set_indices[next] == i) continue;
      kernel_coords.push_back(i);
    }
  }
  if (kernel_coords.size() < static_cast<std::size_t>(l))
    throw std::invalid_argument(
        "construct_family: insufficient kernel capacity, need ambient_dim >= " +
        std::to_string(op.set_size() + l));

  const Eigen::MatrixXd q = flat_completion(n + 1);
  const double unit = 1.0 / std::sqrt(op.weight);

  fam.vectors.resize(op.ambient_dim, static_cast<long>(l) * (n + 1));
  for (int i = 0; i < l; ++i) {
    Eigen::MatrixX<Scalar> eigvecs(op.ambient_dim, n);
    for (int k = 0; k < n; ++k)
      eigvecs.col(k) = spec.ambient_vector(i * n + k);
    Eigen::VectorX<Scalar> h = Eigen::VectorX<Scalar>::Zero(op.ambient_dim);
    h[kernel_coords[i]] = Scalar(unit);
    fam.vectors.middleCols(static_cast<long>(i) * (n + 1), n + 1) =
        build_block<Scalar>(eigvecs, h, q, op.weight);
  }

  fam.residuals.resize(fam.size());
  for (long j = 0; j < fam.size(); ++j) {
    const Eigen::VectorX<Scalar> f = fam.vectors.col(j);
    fam.residuals[j] = localization_residual(op, f);
  }

  // family invariants
  const Eigen::MatrixX<Scalar> gram =
      op.weight * (fam.vectors.adjoint() * fam.vectors);
  const double gram_err =
      (gram - Eigen::MatrixX<Scalar>::Identity(fam.size(), fam.size()))
          .cwiseAbs()
          .maxCoeff();
  if (gram_err > 1e-8)
    throw std::runtime_error("construct_family: family orthonormality defect");
  if (fam.max_residual() > params.epsilon + 1e-6)
    throw std::runtime_error("construct_family: residual above epsilon");
  return fam;
}

struct DensityReport {
  double density = 0.0;       // |family| / scale^d
  double ratio = 0.0;         // density / ((1 + gamma) * reference_density)
  bool near_lower_bound = false;
};

// Compares the constructed family size against the lower-bound density
// (1 + gamma) * reference_density at finite scale.
template <typename Scalar>
DensityReport family_density(const LocalizedFamily<Scalar>& fam, double scale,
                             int dim_exponent, double reference_density,
                             double slack = 0.1) {
  DensityReport rep;
  double vol = 1.0;
  for (int a = 0; a < dim_exponent; ++a) vol *= scale;
  rep.density = static_cast<double>(fam.size()) / vol;
  const double target = (1.0 + fam.params.gamma) * reference_density;
  rep.ratio = (target > 0.0) ? rep.density / target : 0.0;
  rep.near_lower_bound = rep.ratio >= 1.0 - slack;
  return rep;
}

}  // namespace nyqlab
