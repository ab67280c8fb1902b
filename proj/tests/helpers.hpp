#ifndef BCORR_TEST_HELPERS_HPP
#define BCORR_TEST_HELPERS_HPP

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "bcorr/model.hpp"

namespace bcorr::test {

inline Eigen::MatrixXcd random_complex_matrix(int rows, int cols, std::uint64_t seed) {
  GaussianStream g(seed, 0x7e57, 0);
  Eigen::MatrixXcd A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = g.next();
  return A;
}

inline Eigen::MatrixXcd random_hermitian(int n, std::uint64_t seed) {
  const Eigen::MatrixXcd A = random_complex_matrix(n, n, seed);
  return 0.5 * (A + A.adjoint());
}

inline Eigen::MatrixXcd random_hermitian_pd(int n, std::uint64_t seed, double shift = 0.5) {
  const Eigen::MatrixXcd A = random_complex_matrix(n, n, seed);
  return A * A.adjoint() / static_cast<double>(n) + shift * Eigen::MatrixXcd::Identity(n, n);
}

// Dense Yule-Walker oracle: (1, a_l)^T = sigma2_l R_{l+1}^{-T} e_1.
inline std::pair<Eigen::VectorXcd, double> yule_walker_dense(const CovarianceModel& model, int l) {
  const Eigen::MatrixXcd R = model.toeplitz_covariance(l + 1);
  Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(l + 1);
  e1[0] = 1.0;
  const Eigen::VectorXcd x = R.transpose().fullPivLu().solve(e1);
  const double sigma2 = 1.0 / x[0].real();
  return {x.tail(l) * sigma2, sigma2};
}

// Random admissible custom model: r is the autocorrelation of a random
// finite sequence plus a white-noise floor, so S > 0 by construction.
inline CovarianceModel random_custom_model(int degree, std::uint64_t seed, double floor = 0.25) {
  GaussianStream g(seed, 0xc057, 0);
  std::vector<cplx> p(static_cast<size_t>(degree) + 1);
  for (auto& v : p) v = g.next();
  std::vector<cplx> r(static_cast<size_t>(2 * degree + 1), cplx(0.0, 0.0));
  for (int k = 0; k <= degree; ++k) {
    cplx acc = 0.0;
    for (int j = 0; j + k <= degree; ++j) acc += p[static_cast<size_t>(j + k)] * std::conj(p[static_cast<size_t>(j)]);
    r[static_cast<size_t>(degree + k)] = acc;
    r[static_cast<size_t>(degree - k)] = std::conj(acc);
  }
  r[static_cast<size_t>(degree)] += floor;
  // normalize to unit power to keep scales tame
  const double r0 = r[static_cast<size_t>(degree)].real();
  for (auto& v : r) v /= r0;
  return CovarianceModel::custom(r);
}

inline double spectral_norm(const Eigen::MatrixXcd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  return svd.singularValues()[0];
}

}  // namespace bcorr::test

#endif
