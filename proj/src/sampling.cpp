#include "bcorr/sampling.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "bcorr/errors.hpp"
#include "bcorr/matfun.hpp"

namespace bcorr {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

double BlockHermitian::hermitian_defect() const {
  const double n = mat.norm();
  return (mat - mat.adjoint()).norm() / std::max(n, 1.0);
}

std::string SpectralStats::to_json() const {
  nlohmann::json j;
  j["dims"] = {M, N, L};
  j["eigenvalues"] = std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  j["lss"] = lss;
  return j.dump();
}

Eigen::MatrixXcd build_W(const Ensemble& ens) {
  const int M = ens.M, N = ens.N, L = ens.L;
  Eigen::MatrixXcd W(static_cast<Eigen::Index>(M) * L, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < M; ++m)
      for (int j = 0; j < L; ++j)
        W(static_cast<Eigen::Index>(m) * L + j, n) = scale * ens.data(m, n + j);
  return W;
}

Eigen::MatrixXcd build_W_interleaved(const Ensemble& ens) {
  const int M = ens.M, N = ens.N, L = ens.L;
  Eigen::MatrixXcd W(static_cast<Eigen::Index>(M) * L, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (int n = 0; n < N; ++n)
    for (int j = 0; j < L; ++j)
      for (int m = 0; m < M; ++m)
        W(static_cast<Eigen::Index>(j) * M + m, n) = scale * ens.data(m, n + j);
  return W;
}

BlockHermitian sample_cov(const Ensemble& ens) {
  BlockHermitian R(ens.M, ens.L);
  const Eigen::MatrixXcd W = build_W(ens);
  R.mat.noalias() = W * W.adjoint();
  R.mat = 0.5 * (R.mat + R.mat.adjoint().eval());  // scrub rounding asymmetry
  return R;
}

BlockHermitian block_diag(const BlockHermitian& B) {
  BlockHermitian out(B.M, B.L);
  for (int m = 0; m < B.M; ++m) out.block(m, m) = B.block(m, m);
  return out;
}

BlockDiag block_inv_sqrt(const BlockHermitian& B, ExecMode mode) {
  BlockDiag out(B.M, B.L);
  std::vector<std::string> failures(static_cast<size_t>(B.M));
  parallel_for(static_cast<size_t>(B.M), [&](size_t m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B.block(static_cast<int>(m), static_cast<int>(m)));
    const Eigen::VectorXd& lam = es.eigenvalues();
    if (!(lam[0] > 0.0) || lam[lam.size() - 1] / lam[0] > 1e12) {
      failures[m] = "block " + std::to_string(m) + " condition number " +
                    std::to_string(lam[lam.size() - 1] / std::max(lam[0], 1e-300));
      return;
    }
    out[static_cast<int>(m)] = es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
                               es.eigenvectors().adjoint();
  }, mode);
  for (const auto& f : failures)
    if (!f.empty()) throw SingularBlockError("sample autocovariance block is numerically singular: " + f);
  return out;
}

namespace {

BlockHermitian normalize_by(const BlockHermitian& cov, const BlockDiag& s) {
  BlockHermitian out(cov.M, cov.L);
  for (int m = 0; m < cov.M; ++m)
    for (int mp = 0; mp < cov.M; ++mp)
      out.block(m, mp) = s[m] * cov.block(m, mp) * s[mp];
  out.mat = 0.5 * (out.mat + out.mat.adjoint().eval());
  return out;
}

}  // namespace

BlockHermitian sample_block_corr(const BlockHermitian& cov) {
  return normalize_by(cov, block_inv_sqrt(cov));
}

BlockHermitian sample_block_corr(const Ensemble& ens) {
  return sample_block_corr(sample_cov(ens));
}

BlockHermitian oracle_block_corr(const BlockHermitian& cov, const ModelBank& bank) {
  if (bank.size() != cov.M) throw DimensionError("oracle_block_corr: bank size != M");
  BlockDiag s(cov.M, cov.L);
  if (bank.all_identical()) {
    const Eigen::MatrixXcd one = inv_sqrt(bank[0].toeplitz_covariance(cov.L));
    for (int m = 0; m < cov.M; ++m) s[m] = one;
  } else {
    parallel_for(static_cast<size_t>(cov.M), [&](size_t m) {
      s[static_cast<int>(m)] = inv_sqrt(bank[static_cast<int>(m)].toeplitz_covariance(cov.L));
    });
  }
  return normalize_by(cov, s);
}

BlockHermitian oracle_block_corr(const Ensemble& ens, const ModelBank& bank) {
  return oracle_block_corr(sample_cov(ens), bank);
}

Eigen::VectorXcd sample_autocovariance(const Ensemble& ens, int m) {
  const int N = ens.N, L = ens.L;
  Eigen::VectorXcd r(L);
  for (int l = 0; l < L; ++l) {
    cplx s = 0.0;
    for (int n = 0; n < N - l; ++n) s += ens.data(m, n + l) * std::conj(ens.data(m, n));
    r[l] = s / static_cast<double>(N);
  }
  return r;
}

Eigen::MatrixXd lag_window_estimator(const Ensemble& ens, const Eigen::VectorXd& nu_grid,
                                     ExecMode mode) {
  const int M = ens.M, L = ens.L;
  Eigen::MatrixXd out(M, nu_grid.size());
  parallel_for(static_cast<size_t>(M), [&](size_t m) {
    const Eigen::VectorXcd r = sample_autocovariance(ens, static_cast<int>(m));
    for (Eigen::Index g = 0; g < nu_grid.size(); ++g) {
      // S-hat(nu) = r(0) + 2 Re sum_{l=1}^{L-1} r(l) e^{-2 pi i l nu}
      double s = r[0].real();
      for (int l = 1; l < L; ++l)
        s += 2.0 * std::real(r[l] * std::polar(1.0, -two_pi * nu_grid[g] * l));
      out(static_cast<Eigen::Index>(m), g) = s;
    }
  }, mode);
  return out;
}

Eigen::MatrixXcd toeplitz_block_estimate(const Ensemble& ens, int m) {
  const int L = ens.L;
  const Eigen::VectorXcd r = sample_autocovariance(ens, m);
  Eigen::MatrixXcd T(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) T(i, j) = (i >= j) ? r[i - j] : std::conj(r[j - i]);
  return T;
}

double expected_periodogram_bias(const CovarianceModel& model, int L, double nu) {
  if (L < 2) throw DimensionError("expected_periodogram_bias needs L >= 2");
  double s = 0.0;
  for (int l = -(L - 2); l <= L - 2; ++l) {
    const double w = 1.0 - static_cast<double>(std::abs(l)) / static_cast<double>(L);
    s += std::real(w * model.r(l) * std::polar(1.0, -two_pi * nu * l));
  }
  return s - model.spectral_density(nu);
}

SpectralStats eigen_stats(const BlockHermitian& mat, const std::vector<std::string>& statistics,
                          int N) {
  SpectralStats st;
  st.M = mat.M;
  st.L = mat.L;
  st.N = N;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat.mat, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigen_stats: eigendecomposition failed");
  st.eigenvalues = es.eigenvalues();
  const double ml = static_cast<double>(st.eigenvalues.size());
  for (const auto& name : statistics) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < st.eigenvalues.size(); ++k) {
      const double lam = st.eigenvalues[k];
      if (name == "sq_dev") {
        acc += (lam - 1.0) * (lam - 1.0);
      } else if (name == "mean") {
        acc += lam;
      } else if (name == "logdet") {
        // clamp roundoff negatives to 0, then error on the restricted domain
        const double l0 = (lam < 0.0 && lam > -1e-12) ? 0.0 : lam;
        if (l0 <= 0.0) throw DomainError("logdet of a singular matrix");
        acc += std::log(l0);
      } else {
        throw DomainError("unknown statistic '" + name + "'");
      }
    }
    st.lss[name] = acc / ml;
  }
  return st;
}

}  // namespace bcorr
