#ifndef BCORR_MODEL_HPP
#define BCORR_MODEL_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcorr/errors.hpp"
#include "bcorr/parallel.hpp"

namespace bcorr {

using cplx = std::complex<double>;

/// One scalar stationary series: covariance sequence r(k) and spectral
/// density S(nu) = sum_k r(k) exp(-2*pi*i*nu*k), with r(k) = the k-th
/// Fourier coefficient of S.  Construction validates that S is bounded
/// away from zero, so every Toeplitz section is positive definite.
class CovarianceModel {
 public:
  enum class Kind { white, ar1, custom };

  static CovarianceModel white();
  static CovarianceModel ar1(cplx rho);  // |rho| < 1, unit power: r(0) = 1
  // Two-sided sequence r(-K)..r(K); must be Hermitian symmetric and yield a
  // positive spectral density.  Throws PositivityError otherwise.
  static CovarianceModel custom(const std::vector<cplx>& r_two_sided);

  Kind kind() const { return kind_; }
  cplx rho() const { return rho_; }

  cplx r(long k) const;                 // covariance at lag k
  long support() const;                 // r(k) == 0 for |k| > support (ar1: unbounded)

  std::vector<cplx> covariance_sequence(int max_lag) const;
  Eigen::MatrixXcd toeplitz_covariance(int size) const;
  double spectral_density(double nu) const;
  Eigen::VectorXd spectral_density(const Eigen::VectorXd& nu_grid) const;

  // Bounds of S over the validation grid.
  double s_min() const { return s_min_; }
  double s_max() const { return s_max_; }

  bool operator==(const CovarianceModel& o) const;

  std::string to_string() const;

 private:
  CovarianceModel() = default;
  void validate();

  Kind kind_ = Kind::white;
  cplx rho_{0.0, 0.0};
  std::vector<cplx> r_;  // custom: r(-K)..r(K)
  long max_lag_ = 0;     // custom: K
  double s_min_ = 1.0;
  double s_max_ = 1.0;
};

/// One model per series.
struct ModelBank {
  std::vector<CovarianceModel> models;

  ModelBank() = default;
  explicit ModelBank(std::vector<CovarianceModel> m) : models(std::move(m)) {
    if (models.empty()) throw DimensionError("ModelBank needs at least one model");
  }
  static ModelBank repeated(const CovarianceModel& m, int M) {
    return ModelBank(std::vector<CovarianceModel>(static_cast<size_t>(M), m));
  }

  int size() const { return static_cast<int>(models.size()); }
  const CovarianceModel& operator[](int m) const { return models.at(static_cast<size_t>(m)); }
  bool all_identical() const;
  double s_min() const;  // inf over the bank
  double s_max() const;

  std::string to_json() const;
  static ModelBank from_json(const std::string& text);
};

/// M x (N+L-1) array of circularly symmetric Gaussian samples, one row per
/// series, with row covariance equal to the model's Toeplitz covariance.
struct Ensemble {
  Eigen::MatrixXcd data;  // M x (N+L-1)
  int M = 0, N = 0, L = 0;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
};

/// Draws standard complex Gaussians from a stream keyed by
/// (seed, series, replication); streams for distinct keys are disjoint and
/// the draw order inside one stream is fixed, so parallel generation over
/// (series, replication) pairs is schedule-independent.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t series, std::uint64_t replication);
  cplx next();  // CN(0,1): Re and Im independent N(0, 1/2)
  std::uint64_t raw();  // exposed for the stream-collision test

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_;
};

/// Precomputes per-model factors so that sampling a path costs O(n) for
/// white/ar1 and O(n^2) for custom models (dense Cholesky of the Toeplitz
/// covariance, computed once and shared by identical models).
class PathSampler {
 public:
  PathSampler(const ModelBank& bank, int length);
  int length() const { return n_; }
  // Writes one stationary path for series m into out[0..n).
  void sample_row(int m, std::uint64_t seed, std::uint64_t replication, cplx* out) const;

 private:
  const ModelBank& bank_;
  int n_;
  std::vector<int> factor_index_;            // per model, -1 if closed form
  std::vector<Eigen::MatrixXcd> factors_;    // lower Cholesky factors (custom only)
};

Ensemble sample_ensemble(const ModelBank& bank, int N, int L, std::uint64_t seed,
                         std::uint64_t replication = 0,
                         ExecMode mode = ExecMode::openmp);

}  // namespace bcorr

#endif
