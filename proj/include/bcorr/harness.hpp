#ifndef BCORR_HARNESS_HPP
#define BCORR_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "bcorr/model.hpp"
#include "bcorr/mplaw.hpp"
#include "bcorr/parallel.hpp"
#include "bcorr/sampling.hpp"

namespace bcorr {

struct ExperimentConfig {
  double c_star = 0.5;
  std::vector<int> N_list{600};
  std::vector<double> beta_list{0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  cplx rho{0.5, 0.0};
  int reps = 200;
  std::uint64_t seed = 1;
  std::string statistic = "sq_dev";
  std::string outputs = ".";
  int bins = 0;  // 0 = Freedman-Diaconis

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  void validate() const;
};

/// Model used by the experiments: ar1(rho), or white noise when rho is 0.
CovarianceModel experiment_model(cplx rho);

/// [x] = integer closest to x, halves away from zero.
int nearest_int(double x);

struct HistogramResult {
  int M = 0, N = 0, L = 0, reps = 0, dropped = 0;
  Eigen::VectorXd bin_edges;       // B+1
  Eigen::VectorXd emp_density;     // B
  Eigen::VectorXd mp_density;      // B, MP density at bin centers
  double ks = 0.0;                 // pooled empirical CDF vs MP CDF
  double c_N = 0.0;
};

HistogramResult run_histogram(int M, int N, int L, cplx rho, int reps, int bins,
                              std::uint64_t seed, ExecMode mode = ExecMode::openmp);

struct ErrorCurveCell {
  int N = 0;
  double beta = 0.0;
  int M = 0, L = 0;
  double c_N = 0.0;
  double err_total = 0.0;  // RMS of phi_hat - c_N
  double err1 = 0.0;       // RMS of phi_hat - int phi d mu_N
  double err2 = 0.0;       // |int phi d mu_N - c_N|
  double stderr1 = 0.0;    // sd(phi_hat) / sqrt(reps)
  int dropped = 0;
};

struct ErrorCurves {
  std::vector<ErrorCurveCell> cells;
  std::vector<std::string> skipped;  // (N, beta) pairs that gave M < 2 or L < 1
};

ErrorCurves run_error_curves(const ExperimentConfig& config, ExecMode mode = ExecMode::openmp);

struct CrossoverEstimate {
  double beta = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
};

/// beta at which err1 and err2 intersect (log-linear interpolation), per N.
std::optional<CrossoverEstimate> crossover_estimate(const ErrorCurves& curves, int N);

struct MeanIdentityReport {
  int M = 0, L = 0, N = 0, reps = 0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double exact = 0.0;       // c_N + c_N (1/N) Tr(E_N (I + E_N))
  double c_N = 0.0;
  double z_score = 0.0;
  bool infinite_width = false;  // reps == 1, no standard error

  std::string to_json() const;
};

MeanIdentityReport run_mean_identity(int M, int L, int N, cplx rho, int reps, std::uint64_t seed,
                                     ExecMode mode = ExecMode::openmp);

}  // namespace bcorr

#endif
