#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bcorr/model.hpp"
#include "helpers.hpp"

using namespace bcorr;
using test::random_custom_model;

TEST_SUITE_BEGIN("model");

TEST_CASE("covariance sequence closed forms") {
  const auto w = CovarianceModel::white().covariance_sequence(2);
  const std::vector<cplx> w_expect{{0, 0}, {0, 0}, {1, 0}, {0, 0}, {0, 0}};
  for (size_t i = 0; i < w_expect.size(); ++i) CHECK(std::abs(w[i] - w_expect[i]) == 0.0);

  const auto a = CovarianceModel::ar1(cplx(0.5, 0.0)).covariance_sequence(2);
  const std::vector<cplx> a_expect{{0.25, 0}, {0.5, 0}, {1, 0}, {0.5, 0}, {0.25, 0}};
  for (size_t i = 0; i < a_expect.size(); ++i) CHECK(std::abs(a[i] - a_expect[i]) < 1e-15);

  // r(1) = E[y_{n+1} y_n^*] = rho E|y_n|^2 = rho by the AR recursion moments
  const auto ai = CovarianceModel::ar1(cplx(0.0, 0.5)).covariance_sequence(1);
  CHECK(std::abs(ai[0] - cplx(0.0, -0.5)) < 1e-15);
  CHECK(std::abs(ai[1] - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(ai[2] - cplx(0.0, 0.5)) < 1e-15);
}

TEST_CASE("toeplitz covariance") {
  CHECK((CovarianceModel::white().toeplitz_covariance(3) - Eigen::MatrixXcd::Identity(3, 3)).norm() ==
        0.0);

  const auto R2 = CovarianceModel::ar1(cplx(0.5, 0.0)).toeplitz_covariance(2);
  Eigen::MatrixXcd expect(2, 2);
  expect << 1.0, 0.5, 0.5, 1.0;
  CHECK((R2 - expect).norm() < 1e-15);

  // min eigenvalue dominated by s_min = min_nu S(nu), found on a fine grid
  const auto m = CovarianceModel::ar1(cplx(0.9, 0.0));
  double smin_grid = std::numeric_limits<double>::infinity();
  for (int g = 0; g < 20000; ++g)
    smin_grid = std::min(smin_grid, m.spectral_density(g / 20000.0));
  CHECK(smin_grid == doctest::Approx((1.0 - 0.9) / (1.0 + 0.9)).epsilon(1e-6));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.toeplitz_covariance(64));
  CHECK(es.eigenvalues()[0] >= smin_grid - 1e-9);

  // nesting: R_K is the top-left corner of R_K'
  const auto big = m.toeplitz_covariance(32);
  const auto small = m.toeplitz_covariance(12);
  CHECK((big.topLeftCorner(12, 12) - small).norm() == 0.0);
}

TEST_CASE("spectral density closed forms") {
  CHECK(CovarianceModel::white().spectral_density(0.3) == 1.0);
  const auto m = CovarianceModel::ar1(cplx(0.5, 0.0));
  CHECK(m.spectral_density(0.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(m.spectral_density(0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("spectral density and covariance are Fourier consistent") {
  // trapezoid quadrature of S(nu) e^{2 pi i nu k} over 4096 points recovers r(k)
  const int G = 4096;
  for (const auto& m : {CovarianceModel::ar1(cplx(0.5, 0.0)), CovarianceModel::ar1(cplx(0.9, 0.0)),
                        CovarianceModel::ar1(cplx(0.3, 0.4)), random_custom_model(6, 11)}) {
    for (int k : {0, 1, 2, 5}) {
      cplx acc = 0.0;
      for (int g = 0; g < G; ++g) {
        const double nu = static_cast<double>(g) / G;
        acc += m.spectral_density(nu) *
               std::polar(1.0, 2.0 * std::numbers::pi * nu * static_cast<double>(k));
      }
      acc /= static_cast<double>(G);
      CHECK(std::abs(acc - m.r(k)) < 1e-8);
    }
  }
}

TEST_CASE("custom model validation") {
  // S(nu) = 1 - 1.8 cos(2 pi nu) goes negative
  CHECK_THROWS_AS(CovarianceModel::custom({cplx(-0.9, 0), cplx(1, 0), cplx(-0.9, 0)}),
                  PositivityError);
  CHECK_THROWS_AS(CovarianceModel::custom({cplx(0.2, 0.1), cplx(1, 0), cplx(0.2, 0.2)}),
                  PositivityError);  // not Hermitian symmetric
  CHECK_THROWS_AS(CovarianceModel::ar1(cplx(1.2, 0)), DomainError);

  const auto ok = random_custom_model(4, 3);
  CHECK(ok.s_min() > 0.0);
  CHECK(ok.r(0).real() == doctest::Approx(1.0));
}

TEST_CASE("ensemble determinism and moments") {
  const auto bank = ModelBank::repeated(CovarianceModel::white(), 1);
  const int N = 9992, L = 9;  // N+L-1 = 10^4
  const auto e1 = sample_ensemble(bank, N, L, 42);
  const auto e2 = sample_ensemble(bank, N, L, 42);
  CHECK((e1.data - e2.data).norm() == 0.0);
  const auto e3 = sample_ensemble(bank, N, L, 43);
  CHECK((e1.data - e3.data).norm() > 0.0);

  const int n = N + L - 1;
  const double mom = e1.data.row(0).squaredNorm() / n;
  CHECK(std::abs(mom - 1.0) <= 5.0 / std::sqrt(static_cast<double>(n)));

  // ar1(0.5) lag-1 sample autocorrelation over 10^4 samples
  const auto bank2 = ModelBank::repeated(CovarianceModel::ar1(cplx(0.5, 0.0)), 1);
  const auto ea = sample_ensemble(bank2, N, L, 7);
  cplx lag1 = 0.0;
  for (int t = 0; t + 1 < n; ++t) lag1 += ea.data(0, t + 1) * std::conj(ea.data(0, t));
  lag1 /= static_cast<double>(n - 1);
  CHECK(std::abs(lag1 - cplx(0.5, 0.0)) <= 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("generated rows carry the population covariance") {
  // E[(u^H y)(v^H y)^*] = u^H R v, Monte Carlo with a 3 sigma band
  for (const auto& model : {CovarianceModel::ar1(cplx(0.6, 0.2)), random_custom_model(3, 5)}) {
    const auto bank = ModelBank::repeated(model, 1);
    const int n = 48, reps = 4000;
    const Eigen::MatrixXcd R = model.toeplitz_covariance(n);
    const Eigen::VectorXcd u = test::random_complex_matrix(n, 1, 1).normalized();
    const Eigen::VectorXcd v = test::random_complex_matrix(n, 1, 2).normalized();
    const cplx target = u.adjoint() * R * v;

    PathSampler sampler(bank, n);
    std::vector<cplx> vals(reps);
    std::vector<cplx> row(n);
    for (int r = 0; r < reps; ++r) {
      sampler.sample_row(0, 99, static_cast<std::uint64_t>(r), row.data());
      const Eigen::Map<const Eigen::VectorXcd> y(row.data(), n);
      vals[static_cast<size_t>(r)] = (u.adjoint() * y).value() * std::conj((v.adjoint() * y).value());
    }
    cplx mean = 0.0;
    for (const auto& x : vals) mean += x;
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (const auto& x : vals) var += std::norm(x - mean);
    var /= static_cast<double>(reps - 1);
    const double se = std::sqrt(var / reps);
    CHECK(std::abs(mean - target) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("model bank json round trip and repeat shorthand") {
  ModelBank bank({CovarianceModel::ar1(cplx(0.5, -0.25)), CovarianceModel::white(),
                  random_custom_model(2, 17)});
  const auto text = bank.to_json();
  const auto back = ModelBank::from_json(text);
  REQUIRE(back.size() == 3);
  for (int m = 0; m < 3; ++m)
    for (int k = -3; k <= 3; ++k) CHECK(std::abs(back[m].r(k) - bank[m].r(k)) < 1e-15);

  const auto rep = ModelBank::from_json(R"({"repeat": {"kind":"ar1","rho":[0.5,0]}, "M": 4})");
  CHECK(rep.size() == 4);
  CHECK(rep.all_identical());
  const auto rep2 =
      ModelBank::from_json(R"({"models":[{"kind":"white"}], "M": 3, "repeat": true})");
  CHECK(rep2.size() == 3);
  CHECK_THROWS_AS(ModelBank::from_json(R"({"models":[{"kind":"nope"}]})"), ParseError);
  CHECK_THROWS_AS(ModelBank::from_json("not json"), ParseError);
}

TEST_CASE("parallel and serial ensemble generation agree bitwise") {
  ModelBank bank({CovarianceModel::ar1(cplx(0.5, 0.0)), CovarianceModel::white(),
                  CovarianceModel::ar1(cplx(-0.3, 0.1)), random_custom_model(3, 23)});
  const auto a = sample_ensemble(bank, 64, 4, 5, 0, ExecMode::serial);
  const auto b = sample_ensemble(bank, 64, 4, 5, 0, ExecMode::openmp);
  CHECK((a.data - b.data).norm() == 0.0);
}

TEST_SUITE_END();
