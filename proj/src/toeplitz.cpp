#include "bcorr/toeplitz.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "bcorr/errors.hpp"

namespace bcorr {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution of a ready plan is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// In-place DFT of x; sign = FFTW_FORWARD (-1) or FFTW_BACKWARD (+1), unnormalized.
void dft_inplace(Eigen::VectorXcd& x, int sign) {
  fftw_plan plan;
  auto* p = reinterpret_cast<fftw_complex*>(x.data());
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(x.size()), p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
}

}  // namespace

cplx tau(const Eigen::MatrixXcd& M, long l) {
  const long R = M.rows();
  if (M.cols() != R) throw DimensionError("tau needs a square matrix");
  if (std::labs(l) > R - 1) throw DomainError("tau lag out of range");
  cplx s = 0.0;
  if (l >= 0) {
    for (long i = l; i < R; ++i) s += M(i, i - l);
  } else {
    for (long i = 0; i < R + l; ++i) s += M(i, i - l);
  }
  return s / static_cast<double>(R);
}

Eigen::VectorXcd tau_all(const Eigen::MatrixXcd& M, ExecMode mode) {
  const long R = M.rows();
  if (M.cols() != R) throw DimensionError("tau_all needs a square matrix");
  Eigen::VectorXcd out(2 * R - 1);
  parallel_for(static_cast<size_t>(2 * R - 1), [&](size_t idx) {
    const long l = static_cast<long>(idx) - (R - 1);
    out[static_cast<Eigen::Index>(idx)] = tau(M, l);
  }, mode);
  return out;
}

Eigen::MatrixXcd BlockDiag::to_dense() const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(M) * L, static_cast<Eigen::Index>(M) * L);
  for (int m = 0; m < M; ++m) out.block(static_cast<Eigen::Index>(m) * L, static_cast<Eigen::Index>(m) * L, L, L) = blocks[static_cast<size_t>(m)];
  return out;
}

cplx BlockDiag::trace() const {
  cplx t = 0.0;
  for (const auto& b : blocks) t += b.trace();
  return t;
}

Eigen::VectorXcd convolve_with_covariance_direct(const CovarianceModel& model,
                                                 const Eigen::VectorXcd& tau_coeffs, int K) {
  const long R = (tau_coeffs.size() + 1) / 2;
  if (2 * R - 1 != tau_coeffs.size()) throw DimensionError("tau coefficient vector has even length");
  const long lagmax = (K - 1) + (R - 1);
  std::vector<cplx> rr(static_cast<size_t>(2 * lagmax + 1));
  for (long k = -lagmax; k <= lagmax; ++k) rr[static_cast<size_t>(k + lagmax)] = model.r(k);
  Eigen::VectorXcd out(2 * K - 1);
  for (long n = -(K - 1); n <= K - 1; ++n) {
    cplx s = 0.0;
    for (long l = -(R - 1); l <= R - 1; ++l)
      s += rr[static_cast<size_t>(n - l + lagmax)] * tau_coeffs[l + R - 1];
    out[n + K - 1] = s;
  }
  return out;
}

Eigen::VectorXcd convolve_with_covariance_fft(const CovarianceModel& model,
                                              const Eigen::VectorXcd& tau_coeffs, int K) {
  const long R = (tau_coeffs.size() + 1) / 2;
  if (2 * R - 1 != tau_coeffs.size()) throw DimensionError("tau coefficient vector has even length");
  const long lagmax = (K - 1) + (R - 1);
  const long lenA = 2 * lagmax + 1;  // r(-lagmax..lagmax)
  const long lenB = 2 * R - 1;       // tau(-(R-1)..R-1)
  const long P = lenA + lenB - 1;
  Eigen::VectorXcd A = Eigen::VectorXcd::Zero(P), B = Eigen::VectorXcd::Zero(P);
  for (long k = -lagmax; k <= lagmax; ++k) A[k + lagmax] = model.r(k);
  B.head(lenB) = tau_coeffs;
  dft_inplace(A, FFTW_FORWARD);
  dft_inplace(B, FFTW_FORWARD);
  A = A.cwiseProduct(B);
  dft_inplace(A, FFTW_BACKWARD);
  A /= static_cast<double>(P);
  // full conv index s corresponds to lag n = s - lagmax - (R-1)
  Eigen::VectorXcd out(2 * K - 1);
  for (long n = -(K - 1); n <= K - 1; ++n) out[n + K - 1] = A[n + lagmax + (R - 1)];
  return out;
}

Eigen::VectorXcd convolve_with_covariance(const CovarianceModel& model,
                                          const Eigen::VectorXcd& tau_coeffs, int K) {
  const long R = (tau_coeffs.size() + 1) / 2;
  if (R <= 512 && K <= 512) return convolve_with_covariance_direct(model, tau_coeffs, K);
  return convolve_with_covariance_fft(model, tau_coeffs, K);
}

Eigen::MatrixXcd toeplitz_from_coeffs(const Eigen::VectorXcd& coeffs, int K) {
  if (coeffs.size() != 2 * static_cast<Eigen::Index>(K) - 1)
    throw DimensionError("toeplitz_from_coeffs: coefficient count must be 2K-1");
  Eigen::MatrixXcd T(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) T(i, j) = coeffs[i - j + K - 1];
  return T;
}

Eigen::MatrixXcd psi_m(const CovarianceModel& model, const Eigen::MatrixXcd& M, int K) {
  if (K < 1) throw DimensionError("psi_m needs K >= 1");
  const Eigen::VectorXcd t = tau_all(M, ExecMode::serial);
  return toeplitz_from_coeffs(convolve_with_covariance(model, t, K), K);
}

BlockDiag psi_block(const ModelBank& bank, const Eigen::MatrixXcd& M, int L, ExecMode mode) {
  BlockDiag out(bank.size(), L);
  const Eigen::VectorXcd t = tau_all(M, mode);
  if (bank.all_identical()) {
    const Eigen::MatrixXcd b = toeplitz_from_coeffs(convolve_with_covariance(bank[0], t, L), L);
    for (int m = 0; m < bank.size(); ++m) out[m] = b;
    return out;
  }
  parallel_for(static_cast<size_t>(bank.size()), [&](size_t m) {
    out[static_cast<int>(m)] =
        toeplitz_from_coeffs(convolve_with_covariance(bank[static_cast<int>(m)], t, L), L);
  }, mode);
  return out;
}

namespace {

Eigen::MatrixXcd psi_bar_blocks(const ModelBank& bank,
                                const std::function<Eigen::MatrixXcd(int)>& block_of, int N,
                                ExecMode mode) {
  const int M = bank.size();
  // identical models with identical blocks collapse to a single Psi_N
  bool uniform = bank.all_identical();
  Eigen::MatrixXcd first;
  if (uniform) {
    first = block_of(0);
    for (int m = 1; m < M && uniform; ++m)
      uniform = (block_of(m).array() == first.array()).all();
  }
  if (uniform) {
    const Eigen::VectorXcd t = tau_all(first, mode);
    return toeplitz_from_coeffs(convolve_with_covariance(bank[0], t, N), N);
  }
  std::vector<Eigen::VectorXcd> coeffs(static_cast<size_t>(M));
  parallel_for(static_cast<size_t>(M), [&](size_t m) {
    const Eigen::VectorXcd t = tau_all(block_of(static_cast<int>(m)), ExecMode::serial);
    coeffs[m] = convolve_with_covariance(bank[static_cast<int>(m)], t, N);
  }, mode);
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(2 * N - 1);
  for (int m = 0; m < M; ++m) acc += coeffs[static_cast<size_t>(m)];
  acc /= static_cast<double>(M);
  return toeplitz_from_coeffs(acc, N);
}

}  // namespace

Eigen::MatrixXcd psi_bar(const ModelBank& bank, const Eigen::MatrixXcd& M, int N, ExecMode mode) {
  const int Mn = bank.size();
  if (M.rows() != M.cols() || M.rows() % Mn != 0)
    throw DimensionError("psi_bar input must be ML x ML");
  const int L = static_cast<int>(M.rows()) / Mn;
  return psi_bar_blocks(bank, [&](int m) -> Eigen::MatrixXcd {
    return M.block(static_cast<Eigen::Index>(m) * L, static_cast<Eigen::Index>(m) * L, L, L);
  }, N, mode);
}

Eigen::MatrixXcd psi_bar(const ModelBank& bank, const BlockDiag& M, int N, ExecMode mode) {
  if (M.M != bank.size()) throw DimensionError("psi_bar: block count must match bank size");
  return psi_bar_blocks(bank, [&](int m) -> Eigen::MatrixXcd { return M[m]; }, N, mode);
}

Eigen::VectorXcd symbol_fourier_coeffs(const Eigen::VectorXcd& samples, int K) {
  const long G = samples.size();
  if (G < 4L * K) throw GridError("symbol grid of size " + std::to_string(G) +
                                  " is below the 4K aliasing guard for K = " + std::to_string(K));
  Eigen::VectorXcd x = samples;
  dft_inplace(x, FFTW_BACKWARD);  // sum_j f_j e^{+2 pi i l j / G}
  Eigen::VectorXcd c(2 * K - 1);
  for (long l = -(K - 1); l <= K - 1; ++l) {
    const long idx = (l % G + G) % G;
    c[l + K - 1] = x[idx] / static_cast<double>(G);
  }
  return c;
}

Eigen::MatrixXcd toeplitz_from_symbol(const std::function<cplx(double)>& symbol, int K,
                                      int grid_size) {
  if (grid_size < 4 * K)
    throw GridError("toeplitz_from_symbol: grid_size " + std::to_string(grid_size) +
                    " < 4K = " + std::to_string(4 * K));
  Eigen::VectorXcd samples(grid_size);
  for (int j = 0; j < grid_size; ++j)
    samples[j] = symbol(static_cast<double>(j) / static_cast<double>(grid_size));
  return toeplitz_from_coeffs(symbol_fourier_coeffs(samples, K), K);
}

}  // namespace bcorr
