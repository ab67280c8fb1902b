#include "bcorr/matfun.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "bcorr/errors.hpp"

namespace bcorr {

Eigen::MatrixXcd SpectralDecomposition::reconstruct() const {
  const Eigen::Index n = projectors.empty() ? 0 : projectors[0].rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (size_t k = 0; k < projectors.size(); ++k) out += eigenvalues[static_cast<Eigen::Index>(k)] * projectors[k];
  return out;
}

SpectralDecomposition spectral_decomposition(const Eigen::MatrixXcd& H, double cluster_tol) {
  if (H.rows() != H.cols()) throw DimensionError("spectral_decomposition needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw Error("Hermitian eigendecomposition failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Eigen::MatrixXcd& V = es.eigenvectors();
  const double scale = std::max(std::abs(lam[0]), std::abs(lam[lam.size() - 1]));
  const double gap = cluster_tol * std::max(scale, 1.0);

  SpectralDecomposition sd;
  std::vector<double> vals;
  Eigen::Index i = 0;
  while (i < lam.size()) {
    Eigen::Index j = i + 1;
    while (j < lam.size() && lam[j] - lam[j - 1] <= gap) ++j;
    const Eigen::MatrixXcd Vk = V.middleCols(i, j - i);
    sd.projectors.push_back(Vk * Vk.adjoint());
    vals.push_back(lam.segment(i, j - i).mean());
    i = j;
  }
  sd.eigenvalues = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return sd;
}

Eigen::MatrixXcd inv_sqrt(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw Error("Hermitian eigendecomposition failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  if (lam[0] <= 0.0)
    throw NotPositiveDefinite("inv_sqrt: smallest eigenvalue = " + std::to_string(lam[0]));
  return es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().adjoint();
}

Eigen::MatrixXcd d_operator(const SpectralDecomposition& sd, const Eigen::MatrixXcd& X) {
  const size_t K = sd.projectors.size();
  const Eigen::Index n = X.rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  std::vector<Eigen::MatrixXcd> PX(K);
  for (size_t k = 0; k < K; ++k) PX[k] = sd.projectors[k] * X;
  for (size_t k = 0; k < K; ++k) {
    const double sk = std::sqrt(sd.eigenvalues[static_cast<Eigen::Index>(k)]);
    for (size_t l = 0; l < K; ++l) {
      const double sl = std::sqrt(sd.eigenvalues[static_cast<Eigen::Index>(l)]);
      out += PX[k] * sd.projectors[l] / (sk * sl * (sk + sl));
    }
  }
  return out;
}

Eigen::MatrixXcd d_operator(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& X,
                            double cluster_tol) {
  SpectralDecomposition sd = spectral_decomposition(H, cluster_tol);
  if (sd.eigenvalues[0] <= 0.0)
    throw NotPositiveDefinite("d_operator base point must be positive definite");
  return d_operator(sd, X);
}

Eigen::MatrixXcd random_hermitian_unit_norm(int n, std::uint64_t seed) {
  GaussianStream g(seed, 0x6d6174, 0);  // arbitrary fixed stream tag
  Eigen::MatrixXcd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g.next();
  Eigen::MatrixXcd Hm = 0.5 * (A + A.adjoint());
  const double nrm = Hm.selfadjointView<Eigen::Lower>().operatorNorm();
  if (nrm > 0) Hm /= nrm;
  return Hm;
}

std::vector<std::pair<double, double>> perturbation_check(const Eigen::MatrixXcd& H,
                                                          const std::vector<double>& scales,
                                                          std::uint64_t seed) {
  const int n = static_cast<int>(H.rows());
  const Eigen::MatrixXcd D0 = random_hermitian_unit_norm(n, seed);
  const Eigen::MatrixXcd H_half_inv = inv_sqrt(H);
  const SpectralDecomposition sd = spectral_decomposition(H);
  std::vector<std::pair<double, double>> out;
  out.reserve(scales.size());
  for (double s : scales) {
    const Eigen::MatrixXcd lhs = inv_sqrt(H + s * D0) - H_half_inv + d_operator(sd, s * D0);
    out.emplace_back(s, lhs.selfadjointView<Eigen::Lower>().operatorNorm());
  }
  return out;
}

}  // namespace bcorr
