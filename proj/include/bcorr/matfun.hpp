#ifndef BCORR_MATFUN_HPP
#define BCORR_MATFUN_HPP

#include <vector>

#include <Eigen/Dense>

#include "bcorr/model.hpp"

namespace bcorr {

/// Eigenvalues of a Hermitian matrix grouped into (near-)degenerate clusters
/// with the orthogonal projectors onto the corresponding eigenspaces.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;              // one per cluster, ascending
  std::vector<Eigen::MatrixXcd> projectors; // Hermitian, idempotent, sum = I

  Eigen::MatrixXcd reconstruct() const;
};

SpectralDecomposition spectral_decomposition(const Eigen::MatrixXcd& H,
                                             double cluster_tol = 1e-8);

/// Hermitian inverse square root of a Hermitian positive definite matrix.
/// Throws NotPositiveDefinite if the smallest eigenvalue is <= 0.
Eigen::MatrixXcd inv_sqrt(const Eigen::MatrixXcd& H);

/// Differential of A -> A^{-1/2} at the base point H, applied to X:
///   D(X) = sum_{k,l} P_k X P_l / (sqrt(l_k) sqrt(l_l) (sqrt(l_k)+sqrt(l_l))).
Eigen::MatrixXcd d_operator(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& X,
                            double cluster_tol = 1e-8);
Eigen::MatrixXcd d_operator(const SpectralDecomposition& sd, const Eigen::MatrixXcd& X);

/// For a random Hermitian direction D0 with spectral norm 1 and each scale s,
/// reports ||(H + s D0)^{-1/2} - H^{-1/2} + D(s D0)||; the caller asserts the
/// quadratic-order behaviour.
std::vector<std::pair<double, double>> perturbation_check(const Eigen::MatrixXcd& H,
                                                          const std::vector<double>& scales,
                                                          std::uint64_t seed);

/// Random Hermitian matrix with i.i.d. CN(0,1) upper-triangle entries,
/// normalized to unit spectral norm.  Shared by tests and perturbation_check.
Eigen::MatrixXcd random_hermitian_unit_norm(int n, std::uint64_t seed);

}  // namespace bcorr

#endif
