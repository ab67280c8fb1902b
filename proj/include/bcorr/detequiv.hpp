#ifndef BCORR_DETEQUIV_HPP
#define BCORR_DETEQUIV_HPP

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bcorr/model.hpp"
#include "bcorr/szego.hpp"
#include "bcorr/toeplitz.hpp"

namespace bcorr {

/// Solution of the coupled canonical equations at one point z:
///   T  = -(1/z) (I_ML + B^{-1/2} Psi(T~^T) B^{-1/2})^{-1}
///   T~ = -(1/z) (I_N + c_N PsiBar^T(B^{-1/2} T B^{-1/2}))^{-1}
/// T is block diagonal (M blocks of L x L), T~ is dense N x N.
struct StieltjesPair {
  cplx z;
  BlockDiag T;
  Eigen::MatrixXcd T_tilde;
  int iterations = 0;
  double residual = 0.0;

  cplx trace_T() const;  // (1/ML) Tr T, the Stieltjes transform of mu_N at z
};

struct SolveOptions {
  double tol = 1e-10;    // relative Frobenius change of (T, T~) between sweeps
  int max_iter = 500;
  double damping = 1.0;  // relaxation weight; auto-reduced to 0.5 on oscillation
  bool auto_damp = true;
};

/// Per-bank data reused across z points: B^{-1/2} blocks and c_N = ML/N.
class CanonicalSystem {
 public:
  CanonicalSystem(const ModelBank& bank, int L, int N);

  const ModelBank& bank() const { return bank_; }
  int M() const { return bank_.size(); }
  int L() const { return L_; }
  int N() const { return N_; }
  double c_N() const { return cN_; }
  const BlockDiag& b_inv_sqrt() const { return b_inv_sqrt_; }

  /// Damped fixed-point iteration from the Marchenko-Pastur initial guess
  /// (or a caller-provided warm start).  Throws NoConvergence when max_iter
  /// is exhausted; increase Im z, damp harder, or warm-start closer.
  StieltjesPair solve(cplx z, const SolveOptions& opts = {},
                      const StieltjesPair* warm_start = nullptr) const;

  /// Residuals of both canonical equations at the given pair.
  double equation_residual(const StieltjesPair& p) const;

 private:
  ModelBank bank_;
  int L_, N_;
  double cN_;
  BlockDiag b_inv_sqrt_;
};

StieltjesPair solve_canonical(const ModelBank& bank, int L, int N, cplx z,
                              const SolveOptions& opts = {});

cplx trace_stieltjes(const StieltjesPair& pair);

/// eta-smoothed density pi^{-1} Im[(1/ML) Tr T(x + i eta)] on a grid; solved
/// by continuation in the imaginary part, one ladder per grid point.
Eigen::VectorXd density_mu_N(const ModelBank& bank, int L, int N, const Eigen::VectorXd& x_grid,
                             double eta, const SolveOptions& opts = {},
                             ExecMode mode = ExecMode::openmp);

/// The (lambda-1)^2 statistic under mu_N and its Marchenko-Pastur gap:
///   integral = c_N + c_N (1/N) Tr(E_N (I + E_N)),  mp value = c_N.
struct SqDevIntegral {
  double c_N = 0.0;
  double integral = 0.0;    // int (lambda-1)^2 d mu_N
  double correction = 0.0;  // integral - c_N
};
SqDevIntegral sq_dev_integral(const ModelBank& bank, int L, int N, int grid_size = 0);
SqDevIntegral sq_dev_integral(const ErrorMatrixReport& rep, int M, int L, int N);

/// Same gap through the operator route c_N (1/ML) Tr(B^{-1} Psi(E_N)); kept
/// as the independent side of the dual-route identity.
double sq_dev_correction_via_psi(const ModelBank& bank, const Eigen::MatrixXcd& E_N, int L, int N);

/// Stieltjes-class diagnostics for a solved pair.
struct StieltjesAxioms {
  double min_imag_T;        // smallest eigenvalue of Im T (>= -slack expected)
  double min_imag_zT;
  double norm_T_excess;     // ||T|| - 1/Im z
  double min_imag_T_tilde;
  double min_imag_zT_tilde;
  double norm_T_tilde_excess;
};
StieltjesAxioms stieltjes_axioms(const StieltjesPair& pair);

/// Trace report on a z grid, serializable for the CLI.
struct DetEquivReport {
  std::vector<cplx> z_grid;
  std::vector<cplx> trace_T;
  std::vector<cplx> mp_trace;
  std::vector<int> iterations;
  std::vector<double> residuals;
  double sq_dev_int = 0.0, mp_sq_dev = 0.0, correction = 0.0;

  std::string to_json() const;
};
DetEquivReport detequiv_report(const ModelBank& bank, int L, int N,
                               const std::vector<cplx>& z_grid, const SolveOptions& opts = {},
                               ExecMode mode = ExecMode::openmp);

}  // namespace bcorr

#endif
