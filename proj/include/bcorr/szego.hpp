#ifndef BCORR_SZEGO_HPP
#define BCORR_SZEGO_HPP

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bcorr/model.hpp"
#include "bcorr/parallel.hpp"

namespace bcorr {

/// Levinson chain of a covariance sequence: reflection coefficients alpha_n,
/// prediction-error variances sigma2_l, and the reversed monic polynomial
/// coefficients a_{k,l} with Phi*_l(z) = 1 + sum_{k=1..l} a_{k,l} z^k.
/// The chain satisfies the Yule-Walker equations
///   (1, a_l)^T = sigma2_l * R_{l+1}^{-T} e_1
/// at every order l, which fixes all sign conventions.
struct SzegoChain {
  int order = 0;                           // n_max
  Eigen::VectorXcd reflection;             // alpha_0 .. alpha_{n_max-1}
  Eigen::VectorXd sigma2;                  // sigma2_0 .. sigma2_{n_max}
  std::vector<Eigen::VectorXcd> predictor; // predictor[l] = (a_{1,l}..a_{l,l}), l = 0..n_max

  /// a_L(nu)^H R_{m,L}^{-1} a_L(nu) = (1/L) sum_{l<L} |phi*_l(e^{2 pi i nu})|^2,
  /// evaluated by running the recursion at the point e^{2 pi i nu}.
  double quad_form(int L, double nu) const;
};

SzegoChain levinson(const CovarianceModel& model, int order);

/// R_{m,L}^{-1} = A diag(1/sigma2_0 .. 1/sigma2_{L-1}) A^H with A upper
/// unitriangular, columns built from the predictor coefficients.
std::pair<Eigen::MatrixXcd, Eigen::VectorXd> cholesky_inverse_factor(const CovarianceModel& model,
                                                                     int L);

double quad_form_identity(const CovarianceModel& model, int L, double nu);

/// epsilon_{m,L}(nu) = S_m(nu) a_L^H R_{m,L}^{-1} a_L - 1 on a frequency grid.
Eigen::VectorXd epsilon(const CovarianceModel& model, int L, const Eigen::VectorXd& nu_grid);

struct ErrorMatrixReport {
  Eigen::MatrixXd eps_grid;   // M x G, epsilon_{m,L}(nu_g)
  Eigen::MatrixXcd E_N;       // N x N Hermitian Toeplitz
  double sup_eps = 0.0;       // sup over the grid of |mean epsilon|
  double trace_E = 0.0;
  double correction = 0.0;    // (1/N) Tr(E_N (I + E_N))
  int grid_size = 0;

  std::string to_json() const;
};

/// Builds E_N from the averaged symbol (1/M) sum_m epsilon_{m,L}(nu) on a
/// uniform grid of size grid_size (defaults to max(4096, 16 L, 4 N)).
ErrorMatrixReport error_matrix(const ModelBank& bank, int L, int N, int grid_size = 0,
                               ExecMode mode = ExecMode::openmp);

}  // namespace bcorr

#endif
