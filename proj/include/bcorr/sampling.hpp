#ifndef BCORR_SAMPLING_HPP
#define BCORR_SAMPLING_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcorr/model.hpp"
#include "bcorr/parallel.hpp"
#include "bcorr/toeplitz.hpp"

namespace bcorr {

/// ML x ML Hermitian matrix carrying its M-blocks-of-L structure.
struct BlockHermitian {
  int M = 0, L = 0;
  Eigen::MatrixXcd mat;

  BlockHermitian() = default;
  BlockHermitian(int M_, int L_)
      : M(M_), L(L_), mat(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(M_) * L_,
                                                 static_cast<Eigen::Index>(M_) * L_)) {}

  Eigen::Index dim() const { return static_cast<Eigen::Index>(M) * L; }
  auto block(int m, int mp) { return mat.block(static_cast<Eigen::Index>(m) * L, static_cast<Eigen::Index>(mp) * L, L, L); }
  auto block(int m, int mp) const { return mat.block(static_cast<Eigen::Index>(m) * L, static_cast<Eigen::Index>(mp) * L, L, L); }

  double hermitian_defect() const;  // ||A - A^H|| / max(||A||, 1) in Frobenius
};

struct SpectralStats {
  Eigen::VectorXd eigenvalues;  // ascending
  std::map<std::string, double> lss;
  int M = 0, N = 0, L = 0;

  std::string to_json() const;
};

/// W_N: ML x N matrix whose n-th column is y_n^L / sqrt(N) (stacked lag
/// vectors, series-major).  R-hat_L = W W^H.
Eigen::MatrixXcd build_W(const Ensemble& ens);

/// Row-permuted layout with lag-major stacking (block row l holds y_{.,n+l}).
Eigen::MatrixXcd build_W_interleaved(const Ensemble& ens);

BlockHermitian sample_cov(const Ensemble& ens);                        // R-hat_L
BlockHermitian block_diag(const BlockHermitian& B);
BlockHermitian sample_block_corr(const Ensemble& ens);                 // R-hat_corr,L
BlockHermitian sample_block_corr(const BlockHermitian& cov);
BlockHermitian oracle_block_corr(const Ensemble& ens, const ModelBank& bank);  // R-bar_corr,L
BlockHermitian oracle_block_corr(const BlockHermitian& cov, const ModelBank& bank);

/// Block inverse square roots of the diagonal blocks (Hermitian route).
/// Throws SingularBlockError when a block's condition number exceeds 1e12.
BlockDiag block_inv_sqrt(const BlockHermitian& B, ExecMode mode = ExecMode::openmp);

/// Lag-window spectral estimates S-hat_m(nu) for every series (M x G).
Eigen::MatrixXd lag_window_estimator(const Ensemble& ens, const Eigen::VectorXd& nu_grid,
                                     ExecMode mode = ExecMode::openmp);

/// Biased sample autocovariances r-hat_m(l) = (1/N) sum_{n=1}^{N-l} y_{m,n+l} y*_{m,n},
/// returned for l = 0..L-1.
Eigen::VectorXcd sample_autocovariance(const Ensemble& ens, int m);

/// Toeplitz approximation R-hat^t_{m,L} with entries r-hat_m(i-j).
Eigen::MatrixXcd toeplitz_block_estimate(const Ensemble& ens, int m);

/// epsilon_{m,L}(nu) of the periodogram-expectation formula:
/// sum_{|l| <= L-2} (1 - |l|/L) r(l) e^{-2 pi i l nu} - S(nu).
double expected_periodogram_bias(const CovarianceModel& model, int L, double nu);

/// Eigenvalues plus linear spectral statistics (1/ML) sum phi(lambda_k).
/// Built-ins: "sq_dev" (lambda-1)^2, "logdet" log lambda, "mean" lambda.
SpectralStats eigen_stats(const BlockHermitian& mat, const std::vector<std::string>& statistics,
                          int N = 0);

}  // namespace bcorr

#endif
