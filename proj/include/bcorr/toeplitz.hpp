#ifndef BCORR_TOEPLITZ_HPP
#define BCORR_TOEPLITZ_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "bcorr/model.hpp"
#include "bcorr/parallel.hpp"

namespace bcorr {

// Shift-matrix convention, matching the library's Toeplitz indexing: J_K has
// ones on the first upper diagonal ({J}_{i,j} = 1 iff j-i = 1), and J^{-1}
// denotes its transpose.  A Toeplitz matrix with diagonal coefficients c(l)
// has entries T_{ij} = c(i-j) and symbol sum_l c(l) e^{-2 pi i l nu}.

/// tau(M)(l) = (1/R) Tr(M J_R^l), the l-th normalized diagonal average.
cplx tau(const Eigen::MatrixXcd& M, long l);

/// All diagonal averages at once; out[l + R - 1] = tau(M)(l), |l| <= R-1.
Eigen::VectorXcd tau_all(const Eigen::MatrixXcd& M, ExecMode mode = ExecMode::openmp);

/// M x M block-diagonal matrix with L x L blocks.
struct BlockDiag {
  int M = 0, L = 0;
  std::vector<Eigen::MatrixXcd> blocks;

  BlockDiag() = default;
  BlockDiag(int M_, int L_) : M(M_), L(L_), blocks(static_cast<size_t>(M_), Eigen::MatrixXcd::Zero(L_, L_)) {}
  Eigen::MatrixXcd& operator[](int m) { return blocks[static_cast<size_t>(m)]; }
  const Eigen::MatrixXcd& operator[](int m) const { return blocks[static_cast<size_t>(m)]; }
  Eigen::MatrixXcd to_dense() const;
  cplx trace() const;
};

/// c(n) = sum_{|l| <= R-1} r_m(n-l) tau_coeffs[l], |n| <= K-1.  tau_coeffs is
/// indexed like tau_all output.  Direct summation up to size 512, FFT above.
Eigen::VectorXcd convolve_with_covariance(const CovarianceModel& model,
                                          const Eigen::VectorXcd& tau_coeffs, int K);
Eigen::VectorXcd convolve_with_covariance_direct(const CovarianceModel& model,
                                                 const Eigen::VectorXcd& tau_coeffs, int K);
Eigen::VectorXcd convolve_with_covariance_fft(const CovarianceModel& model,
                                              const Eigen::VectorXcd& tau_coeffs, int K);

/// Assembles the K x K Toeplitz matrix T_{ij} = c(i-j) from coefficients
/// c indexed as c[l + K - 1], |l| <= K-1.
Eigen::MatrixXcd toeplitz_from_coeffs(const Eigen::VectorXcd& coeffs, int K);

/// Psi_K^(m)(M): K x K Toeplitz matrix with entries
/// sum_l r_m(i - j - l) tau(M)(l).
Eigen::MatrixXcd psi_m(const CovarianceModel& model, const Eigen::MatrixXcd& M, int K);

/// Psi(M): ML x ML block diagonal with m-th block Psi_L^(m)(M); M is N x N.
BlockDiag psi_block(const ModelBank& bank, const Eigen::MatrixXcd& M, int L,
                    ExecMode mode = ExecMode::openmp);

/// Psi-bar(M): (1/M) sum_m Psi_N^(m)(M_{m,m}) built from the L x L diagonal
/// blocks of the ML x ML input.
Eigen::MatrixXcd psi_bar(const ModelBank& bank, const Eigen::MatrixXcd& M, int N,
                         ExecMode mode = ExecMode::openmp);
Eigen::MatrixXcd psi_bar(const ModelBank& bank, const BlockDiag& M, int N,
                         ExecMode mode = ExecMode::openmp);

/// K x K Toeplitz matrix with coefficients c(l) = int_0^1 symbol(nu)
/// e^{2 pi i l nu} d nu, computed by an FFT over grid_size uniform points
/// (trapezoid rule, exact for trig polynomials below the guard).
/// Throws GridError if grid_size < 4K.
Eigen::MatrixXcd toeplitz_from_symbol(const std::function<cplx(double)>& symbol, int K,
                                      int grid_size);

/// Fourier coefficients c(l), |l| <= K-1, of samples f(j/G), j = 0..G-1,
/// c(l) = (1/G) sum_j f_j e^{2 pi i l j / G}; layout like tau_all.
Eigen::VectorXcd symbol_fourier_coeffs(const Eigen::VectorXcd& samples, int K);

}  // namespace bcorr

#endif
