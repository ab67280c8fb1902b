// Acceptance suite: end-to-end checks with pinned tolerances, one line per
// criterion.  Exit code 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bcorr/detequiv.hpp"
#include "bcorr/harness.hpp"
#include "bcorr/matfun.hpp"
#include "bcorr/mplaw.hpp"
#include "bcorr/sampling.hpp"
#include "bcorr/szego.hpp"
#include "bcorr/toeplitz.hpp"

using namespace bcorr;

namespace {

struct Gate {
  int failures = 0;

  void run(int id, const std::string& label, double runtime_budget_s,
           const std::function<bool(std::string&)>& body) {
    std::string note;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      ok = body(note);
    } catch (const std::exception& e) {
      note = std::string("exception: ") + e.what();
      ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (runtime_budget_s > 0 && secs > runtime_budget_s) {
      ok = false;
      note += (note.empty() ? "" : "; ") + std::string("runtime over budget");
    }
    std::printf("[%s] criterion %2d: %s (%s%s%.1f s / budget %.0f s)\n", ok ? "PASS" : "FAIL", id,
                label.c_str(), note.c_str(), note.empty() ? "" : "; ", secs, runtime_budget_s);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::vector<cplx> acceptance_z_grid() {
  std::vector<cplx> zs;
  for (double re : {-1.0, 0.5, 2.0, 4.0})
    for (double im : {0.05, 0.5, 1.0}) zs.emplace_back(re, im);
  return zs;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

int main() {
  Gate gate;

  gate.run(1, "white-bank MP reduction", 30.0, [](std::string& note) {
    const int M = 8, L = 8, N = 128;
    const CanonicalSystem sys(ModelBank::repeated(CovarianceModel::white(), M), L, N);
    const MPLaw mp(sys.c_N());
    double worst = 0.0;
    for (const cplx& z : acceptance_z_grid()) {
      const auto pair = sys.solve(z);
      const cplx t = mp.stieltjes_t(z);
      double num = 0.0, den = 0.0;
      for (int m = 0; m < M; ++m) {
        num += (pair.T[m] - t * Eigen::MatrixXcd::Identity(L, L)).squaredNorm();
        den += pair.T[m].squaredNorm();
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
    note = "max rel dev " + fmt(worst);
    return worst <= 1e-10;
  });

  gate.run(2, "canonical residual and Stieltjes axioms, ar1(0.5)", 120.0, [](std::string& note) {
    const int M = 8, L = 4, N = 64;
    const CanonicalSystem sys(ModelBank::repeated(CovarianceModel::ar1(cplx(0.5, 0.0)), M), L, N);
    double worst_res = 0.0, worst_axiom = 0.0;
    for (const cplx& z : acceptance_z_grid()) {
      const auto pair = sys.solve(z);
      worst_res = std::max(worst_res, pair.residual);
      const auto ax = stieltjes_axioms(pair);
      worst_axiom = std::max({worst_axiom, -ax.min_imag_T, -ax.min_imag_zT, ax.norm_T_excess,
                              -ax.min_imag_T_tilde, -ax.min_imag_zT_tilde,
                              ax.norm_T_tilde_excess});
    }
    // axiom (iii) through the y -> inf limit of -iy (1/ML) Tr T(iy)
    const auto big = sys.solve(cplx(0.0, 1e9));
    const double lim_dev = std::abs(cplx(0.0, -1e9) * big.trace_T() - 1.0);
    note = "max residual " + fmt(worst_res) + ", axiom slack " + fmt(worst_axiom) +
           ", limit dev " + fmt(lim_dev);
    return worst_res <= 1e-9 && worst_axiom <= 1e-8 && lim_dev <= 1e-8;
  });

  gate.run(3, "exact mean identity, (M,L,N)=(16,8,512), rho=0.5, 2000 reps", 600.0,
           [](std::string& note) {
             const auto rep = run_mean_identity(16, 8, 512, cplx(0.5, 0.0), 2000, 20260809);
             note = "mc " + fmt(rep.mc_mean) + " vs exact " + fmt(rep.exact) + ", z = " +
                    fmt(rep.z_score);
             return std::abs(rep.z_score) <= 4.0 && !rep.infinite_width;
           });

  gate.run(4, "Tr(E_N) = 0 and int eps = 0 across rho and L", 60.0, [](std::string& note) {
    const int N = 256, G = 4096;
    Eigen::VectorXd grid(G);
    for (int i = 0; i < G; ++i) grid[i] = static_cast<double>(i) / G;
    double worst_trace = 0.0, worst_int = 0.0;
    for (double rho : {0.3, 0.5, 0.9}) {
      const auto model = CovarianceModel::ar1(cplx(rho, 0.0));
      for (int L : {8, 32, 128}) {
        const auto rep = error_matrix(ModelBank::repeated(model, 4), L, N);
        worst_trace = std::max(worst_trace, std::abs(rep.trace_E) / N);
        worst_int = std::max(worst_int, std::abs(epsilon(model, L, grid).mean()));
      }
    }
    note = "max |Tr E|/N " + fmt(worst_trace) + ", max |int eps| " + fmt(worst_int);
    return worst_trace <= 1e-8 && worst_int <= 1e-8;
  });

  gate.run(5, "Szego quadratic-form identity vs dense solves", 60.0, [](std::string& note) {
    std::vector<CovarianceModel> models{CovarianceModel::ar1(cplx(0.5, 0.0))};
    {  // two random admissible custom models (moving-average covariances)
      GaussianStream g(71, 0, 0);
      for (int rep = 0; rep < 2; ++rep) {
        std::vector<cplx> p(6);
        for (auto& v : p) v = g.next();
        std::vector<cplx> r(11, cplx(0.0, 0.0));
        for (int k = 0; k <= 5; ++k) {
          cplx acc = 0.0;
          for (int j = 0; j + k <= 5; ++j) acc += p[static_cast<size_t>(j + k)] * std::conj(p[static_cast<size_t>(j)]);
          r[static_cast<size_t>(5 + k)] = acc;
          r[static_cast<size_t>(5 - k)] = std::conj(acc);
        }
        r[5] += 0.3;
        models.push_back(CovarianceModel::custom(r));
      }
    }
    double worst = 0.0;
    for (const auto& model : models) {
      for (int L : {2, 8, 64}) {
        const Eigen::MatrixXcd Rinv = model.toeplitz_covariance(L).inverse();
        for (int gidx = 0; gidx < 64; ++gidx) {
          const double nu = static_cast<double>(gidx) / 64.0;
          Eigen::VectorXcd aL(L);
          for (int k = 0; k < L; ++k)
            aL[k] = std::polar(1.0 / std::sqrt(static_cast<double>(L)),
                               2.0 * std::numbers::pi * nu * k);
          const double dense = (aL.adjoint() * Rinv * aL).value().real();
          worst = std::max(worst, std::abs(quad_form_identity(model, L, nu) - dense) / dense);
        }
      }
    }
    note = "max rel dev " + fmt(worst);
    return worst <= 1e-9;
  });

  gate.run(6, "epsilon decay rate: L sup|eps| bounded, sup monotone", 60.0, [](std::string& note) {
    const auto model = CovarianceModel::ar1(cplx(0.5, 0.0));
    Eigen::VectorXd grid(4096);
    for (int i = 0; i < 4096; ++i) grid[i] = i / 4096.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (int L : {16, 32, 64, 128}) {
      const double sup = epsilon(model, L, grid).cwiseAbs().maxCoeff();
      monotone = monotone && sup <= prev;
      prev = sup;
      lo = std::min(lo, L * sup);
      hi = std::max(hi, L * sup);
    }
    note = "L sup|eps| in [" + fmt(lo) + ", " + fmt(hi) + "]";
    return monotone && hi <= 3.0 * lo;
  });

  gate.run(7, "mu_N <-> MP gap rate: correction drops by >= 3x for L 8 -> 32", 60.0,
           [](std::string& note) {
             const int M = 32;
             const double c = 0.5;
             const auto model = CovarianceModel::ar1(cplx(0.5, 0.0));
             const auto at = [&](int L) {
               const int N = static_cast<int>(std::lround(M * L / c));
               return sq_dev_integral(ModelBank::repeated(model, M), L, N).correction;
             };
             const double c8 = at(8), c32 = at(32);
             note = "corr(8) " + fmt(c8) + " vs corr(32) " + fmt(c32);
             return c8 >= 3.0 * c32 && c32 > 0.0;
           });

  gate.run(8, "Fig.1 regression: pooled KS vs MP <= 0.05 at both panel shapes", 1200.0,
           [](std::string& note) {
             const auto a = run_histogram(80, 600, 10, cplx(0.5, 0.0), 20, 0, 101);
             const auto b = run_histogram(10, 600, 80, cplx(0.5, 0.0), 20, 0, 102);
             note = "ks(80,600,10) " + fmt(a.ks) + ", ks(10,600,80) " + fmt(b.ks);
             return a.ks <= 0.05 && b.ks <= 0.05 && a.dropped == 0 && b.dropped == 0;
           });

  gate.run(9, "Fig.2 trends at desk scale", 1800.0, [](std::string& note) {
    ExperimentConfig cfg;
    cfg.c_star = 0.5;
    cfg.N_list = {600};
    cfg.beta_list = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    cfg.rho = cplx(0.5, 0.0);
    cfg.reps = 200;
    cfg.seed = 424242;
    const auto curves = run_error_curves(cfg);
    if (curves.cells.size() != 6) {
      note = "unexpected cell count";
      return false;
    }
    bool err2_decreasing = true;
    for (size_t i = 0; i + 1 < curves.cells.size(); ++i)
      err2_decreasing = err2_decreasing && curves.cells[i + 1].err2 < curves.cells[i].err2;
    bool err1_increasing = true;
    for (size_t i = 0; i + 1 < curves.cells.size(); ++i)
      if (curves.cells[i].beta >= 0.5 - 1e-12)
        err1_increasing = err1_increasing && curves.cells[i + 1].err1 > curves.cells[i].err1;
    const auto cross = crossover_estimate(curves, 600);
    std::ostringstream os;
    for (const auto& cell : curves.cells)
      os << "  beta=" << cell.beta << " M=" << cell.M << " L=" << cell.L
         << " err_total=" << cell.err_total << " err1=" << cell.err1 << " err2=" << cell.err2
         << " stderr1=" << cell.stderr1 << " dropped=" << cell.dropped << "\n";
    std::printf("%s", os.str().c_str());
    note = cross.has_value() ? ("crossover " + fmt(cross->beta)) : "no crossover";
    return err2_decreasing && err1_increasing && cross.has_value() && cross->beta >= 0.2 &&
           cross->beta <= 0.5;
  });

  gate.run(10, "operator-algebra property suites, 100 trials each", 120.0, [](std::string& note) {
    GaussianStream g(8086, 0, 0);
    auto rand_mat = [&](int r, int c) {
      Eigen::MatrixXcd A(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) A(i, j) = g.next();
      return A;
    };
    const auto model = CovarianceModel::ar1(cplx(0.5, 0.0));
    ModelBank bank({model, CovarianceModel::ar1(cplx(-0.3, 0.2)), CovarianceModel::white()});
    const int L = 3, N = 8, ML = bank.size() * L;
    int bad = 0;

    for (int t = 0; t < 100; ++t) {
      {  // commutation
        const auto A = rand_mat(5, 5), B = rand_mat(7, 7);
        const cplx lhs = (A * psi_m(model, B, 5)).trace() / 5.0;
        const cplx rhs = (psi_m(model, A, 7) * B).trace() / 7.0;
        if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs))) ++bad;
      }
      {  // duality
        const auto A = rand_mat(ML, ML), B = rand_mat(N, N);
        const cplx lhs = (psi_bar(bank, A, N) * B).trace() / static_cast<double>(N);
        const cplx rhs = (A * psi_block(bank, B, L).to_dense()).trace() / static_cast<double>(ML);
        if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs))) ++bad;
      }
      {  // Parseval
        const auto M9 = rand_mat(9, 9);
        if (tau_all(M9).squaredNorm() > (M9 * M9.adjoint()).trace().real() / 9.0 + 1e-12) ++bad;
      }
      {  // trace by diagonals
        Eigen::VectorXcd coef(11);
        for (int i = 0; i < 11; ++i) coef[i] = g.next();
        const auto A = toeplitz_from_coeffs(coef, 6);
        const auto B = rand_mat(6, 6);
        const auto tb = tau_all(B);
        cplx rhs = 0.0;
        for (long l = -5; l <= 5; ++l) rhs += coef[l + 5] * tb[-l + 5];
        if (std::abs((A * B).trace() / 6.0 - rhs) > 1e-10 * std::max(1.0, std::abs(rhs))) ++bad;
      }
      {  // positivity
        const auto X = rand_mat(6, 6);
        const Eigen::MatrixXcd P = X * X.adjoint() / 6.0 + 0.1 * Eigen::MatrixXcd::Identity(6, 6);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(psi_m(model, P, 5),
                                                           Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues()[0] > 0.0)) ++bad;
      }
      {  // D-operator trace swap and Frobenius contraction
        const Eigen::MatrixXcd H = model.toeplitz_covariance(6);
        const auto A = rand_mat(6, 6), B = rand_mat(6, 6);
        const cplx lhs = (d_operator(H, A) * B).trace();
        const cplx rhs = (A * d_operator(H, B)).trace();
        if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs))) ++bad;
        const double kappa = 1.0 / (4.0 * std::pow(model.s_min(), 3.0));
        const auto D = d_operator(H, A);
        if ((D * D.adjoint()).trace().real() > kappa * (A * A.adjoint()).trace().real() + 1e-12)
          ++bad;
      }
      {  // perturbation second order
        const Eigen::MatrixXcd H = model.toeplitz_covariance(5);
        const auto tbl = perturbation_check(H, {1e-2, 1e-3}, 9000 + static_cast<std::uint64_t>(t));
        const double q0 = tbl[0].second / 1e-4, q1 = tbl[1].second / 1e-6;
        if (!(q1 <= 2.0 * q0 + 1e-9 && q1 >= 0.5 * q0 - 1e-9)) ++bad;
      }
    }
    note = std::to_string(bad) + " failures";
    return bad == 0;
  });

  gate.run(11, "fluctuation-rate slope table (logged, not asserted)", 600.0,
           [](std::string& note) {
             // RMS(phi_hat - phi_bar) vs M at fixed L; sharp constants are out of
             // desk-scale reach, so this table is informational only.
             const int L = 4, reps = 100;
             std::printf("  RMS(phi_hat - phi_bar) at fixed L = %d (c = 0.5):\n", L);
             std::vector<double> logM, logE;
             for (int M : {8, 16, 32}) {
               const int N = 2 * M * L;
               const auto bank = ModelBank::repeated(CovarianceModel::ar1(cplx(0.5, 0.0)), M);
               double acc = 0.0;
               for (int r = 0; r < reps; ++r) {
                 const auto ens = sample_ensemble(bank, N, L, 5150 + static_cast<std::uint64_t>(r));
                 const auto cov = sample_cov(ens);
                 const Eigen::Index d = cov.dim();
                 const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
                 const double hat = (sample_block_corr(cov).mat - I).squaredNorm() / d;
                 const double bar = (oracle_block_corr(cov, bank).mat - I).squaredNorm() / d;
                 acc += (hat - bar) * (hat - bar);
               }
               const double rms = std::sqrt(acc / reps);
               std::printf("    M = %2d: %.3e\n", M, rms);
               logM.push_back(std::log(M));
               logE.push_back(std::log(rms));
             }
             const double slope = (logE.back() - logE.front()) / (logM.back() - logM.front());
             std::printf("    log-log slope: %.2f (1/M rate corresponds to -1)\n", slope);
             note = "slope " + fmt(slope) + " (logged only)";
             return true;
           });

  std::printf("%d criterion(s) failed\n", gate.failures);
  return gate.failures == 0 ? 0 : 1;
}
