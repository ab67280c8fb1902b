#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bcorr/toeplitz.hpp"
#include "helpers.hpp"

using namespace bcorr;
using test::random_complex_matrix;
using test::random_custom_model;
using test::random_hermitian_pd;
using test::spectral_norm;

namespace {

Eigen::MatrixXcd shift_matrix_power(int R, long l) {
  // J_R^l: ones where j - i = l (transpose powers for negative l)
  Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(R, R);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j)
      if (j - i == l) J(i, j) = 1.0;
  return J;
}

}  // namespace

TEST_SUITE_BEGIN("toeplitz");

TEST_CASE("tau basics") {
  const Eigen::MatrixXcd I4 = Eigen::MatrixXcd::Identity(4, 4);
  CHECK(std::abs(tau(I4, 0) - 1.0) == 0.0);
  CHECK(std::abs(tau(I4, 1)) == 0.0);

  // tau(J^{-k})(k) = (R-k)/R: count of ones on the k-th lower diagonal
  const int R = 7;
  for (int k = 0; k < R; ++k) {
    const auto Jmk = shift_matrix_power(R, -k);
    CHECK(std::abs(tau(Jmk, k) - static_cast<double>(R - k) / R) < 1e-15);
  }
}

TEST_CASE("tau matches the trace definition on random input") {
  const int R = 9;
  const auto M = random_complex_matrix(R, R, 31);
  const auto t = tau_all(M);
  for (long l = -(R - 1); l <= R - 1; ++l) {
    const cplx direct = (M * shift_matrix_power(R, l)).trace() / static_cast<double>(R);
    CHECK(std::abs(t[l + R - 1] - direct) < 1e-13);
  }
}

TEST_CASE("parseval inequality") {
  for (int trial = 0; trial < 100; ++trial) {
    const int R = 3 + trial % 10;
    const auto M = random_complex_matrix(R, R, 100 + static_cast<std::uint64_t>(trial));
    const auto t = tau_all(M);
    CHECK(t.squaredNorm() <= (M * M.adjoint()).trace().real() / R + 1e-12);
  }
}

TEST_CASE("psi reproduces the Toeplitz covariance on the identity") {
  for (const auto& m : {CovarianceModel::ar1(cplx(0.5, 0.0)), CovarianceModel::white(),
                        random_custom_model(4, 7)}) {
    const auto P = psi_m(m, Eigen::MatrixXcd::Identity(16, 16), 10);
    CHECK((P - m.toeplitz_covariance(10)).norm() < 1e-12);
  }
}

TEST_CASE("white psi is plain Toeplitzification") {
  const auto M = random_complex_matrix(6, 6, 13);
  const auto P = psi_m(CovarianceModel::white(), M, 5);
  const auto t = tau_all(M);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(std::abs(P(i, j) - t[i - j + 5]) < 1e-14);
}

TEST_CASE("psi entries match the brute-force double sum") {
  const auto model = CovarianceModel::ar1(cplx(0.5, 0.0));
  const int R = 4, K = 6;
  const auto M = random_complex_matrix(R, R, 77);
  const auto P = psi_m(model, M, K);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      cplx acc = 0.0;
      for (long l = -(R - 1); l <= R - 1; ++l)
        acc += model.r(i - j - l) * ((M * shift_matrix_power(R, l)).trace() / static_cast<double>(R));
      CHECK(std::abs(P(i, j) - acc) < 1e-13);
    }
  }
}

TEST_CASE("psi_block and psi_bar structure") {
  ModelBank bank({CovarianceModel::ar1(cplx(0.5, 0.0)), CovarianceModel::white(),
                  random_custom_model(3, 9)});
  const int L = 4, N = 12;

  // Psi(I_N) = Bdiag(R_{m,L})
  const auto B = psi_block(bank, Eigen::MatrixXcd::Identity(N, N), L);
  for (int m = 0; m < bank.size(); ++m)
    CHECK((B[m] - bank[m].toeplitz_covariance(L)).norm() < 1e-12);

  // single-model reduction
  ModelBank one({bank[0]});
  const auto M1 = random_complex_matrix(N, N, 5);
  CHECK((psi_block(one, M1, L)[0] - psi_m(bank[0], M1, L)).norm() == 0.0);

  // linearity
  const auto X = random_complex_matrix(N, N, 6), Y = random_complex_matrix(N, N, 8);
  const auto PX = psi_block(bank, X, L), PY = psi_block(bank, Y, L),
             PXY = psi_block(bank, X + Y, L);
  for (int m = 0; m < bank.size(); ++m) CHECK((PXY[m] - PX[m] - PY[m]).norm() < 1e-12);

  // white bank: psi_bar(I_ML) = I_N
  ModelBank white = ModelBank::repeated(CovarianceModel::white(), 3);
  const auto PB = psi_bar(white, Eigen::MatrixXcd::Identity(3 * L, 3 * L), N);
  CHECK((PB - Eigen::MatrixXcd::Identity(N, N)).norm() < 1e-13);
}

TEST_CASE("duality between psi and psi_bar") {
  ModelBank bank({CovarianceModel::ar1(cplx(0.4, 0.1)), random_custom_model(2, 14),
                  CovarianceModel::white()});
  const int L = 3, N = 10, ML = bank.size() * L;
  for (int trial = 0; trial < 100; ++trial) {
    const auto A = random_complex_matrix(ML, ML, 200 + static_cast<std::uint64_t>(trial));
    const auto Bm = random_complex_matrix(N, N, 300 + static_cast<std::uint64_t>(trial));
    const cplx lhs = (psi_bar(bank, A, N) * Bm).trace() / static_cast<double>(N);
    const cplx rhs = (A * psi_block(bank, Bm, L).to_dense()).trace() / static_cast<double>(ML);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("commutation identity") {
  for (int trial = 0; trial < 100; ++trial) {
    const auto model = (trial % 2 == 0) ? CovarianceModel::ar1(cplx(0.5, 0.0))
                                        : random_custom_model(3, 40 + static_cast<std::uint64_t>(trial));
    const int K = 3 + trial % 5, R = 4 + trial % 7;
    const auto A = random_complex_matrix(K, K, 400 + static_cast<std::uint64_t>(trial));
    const auto B = random_complex_matrix(R, R, 500 + static_cast<std::uint64_t>(trial));
    const cplx lhs = (A * psi_m(model, B, K)).trace() / static_cast<double>(K);
    const cplx rhs = (psi_m(model, A, R) * B).trace() / static_cast<double>(R);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("trace by diagonals") {
  for (int trial = 0; trial < 100; ++trial) {
    const int R = 3 + trial % 8;
    // A Toeplitz from random diagonal coefficients
    Eigen::VectorXcd a(2 * R - 1);
    GaussianStream g(600 + static_cast<std::uint64_t>(trial), 0, 0);
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = g.next();
    const auto A = toeplitz_from_coeffs(a, R);
    const auto B = random_complex_matrix(R, R, 700 + static_cast<std::uint64_t>(trial));
    const cplx lhs = (A * B).trace() / static_cast<double>(R);
    cplx rhs = 0.0;
    const auto tb = tau_all(B);
    for (long l = -(R - 1); l <= R - 1; ++l) rhs += a[l + R - 1] * tb[-l + R - 1];
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("norm bound and positivity") {
  const auto model = CovarianceModel::ar1(cplx(0.6, 0.0));
  double smax = 0.0;
  for (int gidx = 0; gidx < 4096; ++gidx)
    smax = std::max(smax, model.spectral_density(gidx / 4096.0));
  for (int trial = 0; trial < 30; ++trial) {
    const int R = 4 + trial % 5;
    const auto M = random_complex_matrix(R, R, 800 + static_cast<std::uint64_t>(trial));
    CHECK(spectral_norm(psi_m(model, M, 6)) <= smax * spectral_norm(M) + 1e-10);
    const auto Mpd = random_hermitian_pd(R, 900 + static_cast<std::uint64_t>(trial));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(psi_m(model, Mpd, 6));
    CHECK(es.eigenvalues()[0] > 0.0);
  }
}

TEST_CASE("direct and fft convolution agree") {
  for (const auto& model : {CovarianceModel::ar1(cplx(0.7, -0.2)), random_custom_model(5, 21)}) {
    for (int trial = 0; trial < 10; ++trial) {
      const int R = 5 + 97 * trial, K = 700 - 60 * trial;
      Eigen::VectorXcd t(2 * R - 1);
      GaussianStream g(1000 + static_cast<std::uint64_t>(trial), 1, 0);
      for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = g.next();
      const auto a = convolve_with_covariance_direct(model, t, K);
      const auto b = convolve_with_covariance_fft(model, t, K);
      CHECK((a - b).norm() < 1e-10 * std::max(1.0, a.norm()));
    }
  }
}

TEST_CASE("toeplitz from symbol") {
  // constant symbol -> identity
  const auto I = toeplitz_from_symbol([](double) { return cplx(1.0, 0.0); }, 5, 64);
  CHECK((I - Eigen::MatrixXcd::Identity(5, 5)).norm() < 1e-12);

  // symbol e^{2 pi i nu}: c(l) = int e^{2 pi i nu} e^{2 pi i l nu} d nu = delta_{l,-1},
  // entries at i - j = -1 (ones on the first upper diagonal, J_K)
  const auto J = toeplitz_from_symbol(
      [](double nu) { return std::polar(1.0, 2.0 * std::numbers::pi * nu); }, 3, 64);
  CHECK((J - shift_matrix_power(3, 1)).norm() < 1e-12);

  // symbol = AR(1) spectral density -> Toeplitz covariance
  const auto model = CovarianceModel::ar1(cplx(0.5, 0.0));
  const auto R = toeplitz_from_symbol(
      [&](double nu) { return cplx(model.spectral_density(nu), 0.0); }, 8, 8192);
  CHECK((R - model.toeplitz_covariance(8)).norm() < 1e-10);

  CHECK_THROWS_AS(toeplitz_from_symbol([](double) { return cplx(1.0, 0.0); }, 8, 31), GridError);
}

TEST_CASE("tau_all parallel equals serial") {
  const auto M = random_complex_matrix(40, 40, 4242);
  CHECK((tau_all(M, ExecMode::serial) - tau_all(M, ExecMode::openmp)).norm() == 0.0);
}

TEST_SUITE_END();
