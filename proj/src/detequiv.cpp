#include "bcorr/detequiv.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "bcorr/errors.hpp"
#include "bcorr/matfun.hpp"
#include "bcorr/mplaw.hpp"

namespace bcorr {

cplx StieltjesPair::trace_T() const {
  return T.trace() / static_cast<double>(T.M * T.L);
}

cplx trace_stieltjes(const StieltjesPair& pair) { return pair.trace_T(); }

CanonicalSystem::CanonicalSystem(const ModelBank& bank, int L, int N)
    : bank_(bank), L_(L), N_(N), cN_(static_cast<double>(bank.size()) * L / N) {
  if (L < 1 || N < 1) throw DimensionError("CanonicalSystem needs L >= 1 and N >= 1");
  b_inv_sqrt_ = BlockDiag(bank.size(), L);
  if (bank_.all_identical()) {
    const Eigen::MatrixXcd one = inv_sqrt(bank_[0].toeplitz_covariance(L));
    for (int m = 0; m < bank_.size(); ++m) b_inv_sqrt_[m] = one;
  } else {
    for (int m = 0; m < bank_.size(); ++m)
      b_inv_sqrt_[m] = inv_sqrt(bank_[m].toeplitz_covariance(L));
  }
}

namespace {

// One application of Eq. (13): T~ from T.
Eigen::MatrixXcd step_T_tilde(const CanonicalSystem& sys, const BlockDiag& T, cplx z) {
  BlockDiag X(sys.M(), sys.L());
  for (int m = 0; m < sys.M(); ++m)
    X[m] = sys.b_inv_sqrt()[m] * T[m] * sys.b_inv_sqrt()[m];
  const Eigen::MatrixXcd P = psi_bar(sys.bank(), X, sys.N(), ExecMode::serial);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(sys.N(), sys.N()) + sys.c_N() * P.transpose();
  return (-1.0 / z) * A.inverse();
}

// One application of Eq. (12): T from T~.
BlockDiag step_T(const CanonicalSystem& sys, const Eigen::MatrixXcd& T_tilde, cplx z) {
  const BlockDiag Q = psi_block(sys.bank(), T_tilde.transpose(), sys.L(), ExecMode::serial);
  BlockDiag T(sys.M(), sys.L());
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(sys.L(), sys.L());
  if (sys.bank().all_identical()) {
    const Eigen::MatrixXcd A = I + sys.b_inv_sqrt()[0] * Q[0] * sys.b_inv_sqrt()[0];
    const Eigen::MatrixXcd B = (-1.0 / z) * A.inverse();
    for (int m = 0; m < sys.M(); ++m) T[m] = B;
    return T;
  }
  for (int m = 0; m < sys.M(); ++m) {
    const Eigen::MatrixXcd A = I + sys.b_inv_sqrt()[m] * Q[m] * sys.b_inv_sqrt()[m];
    T[m] = (-1.0 / z) * A.inverse();
  }
  return T;
}

double rel_change(const BlockDiag& a, const BlockDiag& b, const Eigen::MatrixXcd& at,
                  const Eigen::MatrixXcd& bt) {
  double num = (at - bt).squaredNorm(), den = bt.squaredNorm();
  for (int m = 0; m < a.M; ++m) {
    num += (a[m] - b[m]).squaredNorm();
    den += b[m].squaredNorm();
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

// Flattened view of the pair state for the Aitken extrapolation step.
Eigen::VectorXcd pack_state(const BlockDiag& T, const Eigen::MatrixXcd& Tt) {
  const Eigen::Index nb = static_cast<Eigen::Index>(T.M) * T.L * T.L;
  Eigen::VectorXcd v(nb + Tt.size());
  Eigen::Index off = 0;
  for (int m = 0; m < T.M; ++m) {
    v.segment(off, T[m].size()) = Eigen::Map<const Eigen::VectorXcd>(T[m].data(), T[m].size());
    off += T[m].size();
  }
  v.segment(off, Tt.size()) = Eigen::Map<const Eigen::VectorXcd>(Tt.data(), Tt.size());
  return v;
}

void unpack_state(const Eigen::VectorXcd& v, BlockDiag& T, Eigen::MatrixXcd& Tt) {
  Eigen::Index off = 0;
  for (int m = 0; m < T.M; ++m) {
    Eigen::Map<Eigen::VectorXcd>(T[m].data(), T[m].size()) = v.segment(off, T[m].size());
    off += T[m].size();
  }
  Eigen::Map<Eigen::VectorXcd>(Tt.data(), Tt.size()) = v.segment(off, Tt.size());
}

}  // namespace

double CanonicalSystem::equation_residual(const StieltjesPair& p) const {
  const BlockDiag T_rhs = step_T(*this, p.T_tilde, p.z);
  const Eigen::MatrixXcd Tt_rhs = step_T_tilde(*this, p.T, p.z);
  double numT = 0.0, denT = 0.0;
  for (int m = 0; m < M(); ++m) {
    numT += (p.T[m] - T_rhs[m]).squaredNorm();
    denT += p.T[m].squaredNorm();
  }
  const double resT = std::sqrt(numT / std::max(denT, 1e-300));
  const double resTt = (p.T_tilde - Tt_rhs).norm() / std::max(p.T_tilde.norm(), 1e-300);
  return std::max(resT, resTt);
}

StieltjesPair CanonicalSystem::solve(cplx z, const SolveOptions& opts,
                                     const StieltjesPair* warm_start) const {
  if (!(z.imag() > 0.0)) throw DomainError("solve_canonical requires Im z > 0");
  StieltjesPair p;
  p.z = z;
  if (warm_start != nullptr) {
    p.T = warm_start->T;
    p.T_tilde = warm_start->T_tilde;
  } else {
    const MPLaw mp(cN_);
    const cplx t = mp.stieltjes_t(z);
    const cplx tt = mp.stieltjes_t_tilde(z);
    p.T = BlockDiag(M(), L_);
    for (int m = 0; m < M(); ++m) p.T[m] = t * Eigen::MatrixXcd::Identity(L_, L_);
    p.T_tilde = tt * Eigen::MatrixXcd::Identity(N_, N_);
  }

  double omega = opts.damping;
  double prev_change = std::numeric_limits<double>::infinity();
  int rising = 0;
  // Near the real axis the plain iteration contracts like 1 - O(Im z); a
  // geometric (vector Aitken) jump every few sweeps removes the stall.  The
  // fixed point reached is still certified by the equation residual below.
  Eigen::VectorXcd prev_delta;
  int since_extrap = 1;  // no jump yet; first-sweep convergence may return
  for (int it = 1; it <= opts.max_iter; ++it) {
    // Eq. (13) first, then Eq. (12), composition order of the existence proof
    Eigen::MatrixXcd Tt_new = step_T_tilde(*this, p.T, z);
    if (omega != 1.0) Tt_new = (1.0 - omega) * p.T_tilde + omega * Tt_new;
    BlockDiag T_new = step_T(*this, Tt_new, z);
    if (omega != 1.0)
      for (int m = 0; m < M(); ++m) T_new[m] = (1.0 - omega) * p.T[m] + omega * T_new[m];

    const double change = rel_change(T_new, p.T, Tt_new, p.T_tilde);
    Eigen::VectorXcd delta = pack_state(T_new, Tt_new) - pack_state(p.T, p.T_tilde);
    p.T = std::move(T_new);
    p.T_tilde = std::move(Tt_new);
    p.iterations = it;
    bool extrapolated = false;
    if (change < opts.tol && since_extrap >= 1) {
      p.residual = equation_residual(p);
      if (p.residual < 10.0 * opts.tol) return p;
    } else if (prev_delta.size() == delta.size() && it % 4 == 0) {
      const cplx denom = prev_delta.squaredNorm();
      if (std::abs(denom) > 0.0) {
        const cplx rho = prev_delta.dot(delta) / denom;  // <prev, delta> contraction estimate
        const double r = std::abs(rho);
        if (r > 0.2 && r < 0.99999 && std::abs(1.0 - rho) > 1e-8) {
          Eigen::VectorXcd state = pack_state(p.T, p.T_tilde) + delta * (rho / (1.0 - rho));
          unpack_state(state, p.T, p.T_tilde);
          extrapolated = true;
        }
      }
    }
    since_extrap = extrapolated ? 0 : since_extrap + 1;
    prev_delta = extrapolated ? Eigen::VectorXcd() : std::move(delta);
    if (opts.auto_damp && change > prev_change) {
      if (++rising >= 2 && omega > 0.5) {
        omega = 0.5;
        rising = 0;
      }
    } else {
      rising = 0;
    }
    prev_change = change;
  }
  p.residual = equation_residual(p);
  throw NoConvergence("canonical solver: no convergence at z = (" + std::to_string(z.real()) +
                          ", " + std::to_string(z.imag()) + ") after " +
                          std::to_string(opts.max_iter) + " iterations",
                      opts.max_iter, p.residual);
}

StieltjesPair solve_canonical(const ModelBank& bank, int L, int N, cplx z,
                              const SolveOptions& opts) {
  return CanonicalSystem(bank, L, N).solve(z, opts);
}

Eigen::VectorXd density_mu_N(const ModelBank& bank, int L, int N, const Eigen::VectorXd& x_grid,
                             double eta, const SolveOptions& opts, ExecMode mode) {
  if (!(eta > 0.0)) throw DomainError("density_mu_N needs eta > 0");
  const CanonicalSystem sys(bank, L, N);
  Eigen::VectorXd out(x_grid.size());
  std::vector<std::string> failures(static_cast<size_t>(x_grid.size()));
  parallel_for(static_cast<size_t>(x_grid.size()), [&](size_t i) {
    const cplx target(x_grid[static_cast<Eigen::Index>(i)], eta);
    try {
      // direct solve from the MP initialization; continuation ladder in the
      // imaginary part only when that stalls
      try {
        out[static_cast<Eigen::Index>(i)] = sys.solve(target, opts).trace_T().imag() / std::numbers::pi;
        return;
      } catch (const NoConvergence&) {
      }
      double y = std::max(1.0, 8.0 * eta);
      StieltjesPair p = sys.solve(cplx(target.real(), y), opts);
      while (y > eta) {
        y = std::max(eta, 0.5 * y);
        p = sys.solve(cplx(target.real(), y), opts, &p);
      }
      out[static_cast<Eigen::Index>(i)] = p.trace_T().imag() / std::numbers::pi;
    } catch (const NoConvergence& e) {
      failures[i] = e.what();
    }
  }, mode);
  for (const auto& f : failures)
    if (!f.empty()) throw NoConvergence(f, opts.max_iter, 0.0);
  return out;
}

SqDevIntegral sq_dev_integral(const ErrorMatrixReport& rep, int M, int L, int N) {
  SqDevIntegral out;
  out.c_N = static_cast<double>(M) * L / N;
  out.correction = out.c_N * rep.correction;
  out.integral = out.c_N + out.correction;
  return out;
}

SqDevIntegral sq_dev_integral(const ModelBank& bank, int L, int N, int grid_size) {
  return sq_dev_integral(error_matrix(bank, L, N, grid_size), bank.size(), L, N);
}

double sq_dev_correction_via_psi(const ModelBank& bank, const Eigen::MatrixXcd& E_N, int L,
                                 int N) {
  const int M = bank.size();
  const double c_N = static_cast<double>(M) * L / N;
  cplx acc = 0.0;
  for (int m = 0; m < M; ++m) {
    const Eigen::MatrixXcd psiE = psi_m(bank[m], E_N, L);
    const Eigen::MatrixXcd Rinv = bank[m].toeplitz_covariance(L).inverse();
    acc += (Rinv * psiE).trace();
  }
  return c_N * acc.real() / static_cast<double>(M * L);
}

namespace {

double min_eig_hermitian(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (H + H.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace

StieltjesAxioms stieltjes_axioms(const StieltjesPair& pair) {
  StieltjesAxioms ax{};
  const cplx z = pair.z;
  const cplx i2(0.0, 2.0);
  double min_im = std::numeric_limits<double>::infinity();
  double min_imz = min_im;
  double max_norm = 0.0;
  for (int m = 0; m < pair.T.M; ++m) {
    const Eigen::MatrixXcd& Tm = pair.T[m];
    min_im = std::min(min_im, min_eig_hermitian((Tm - Tm.adjoint()) / i2));
    const Eigen::MatrixXcd zT = z * Tm;
    min_imz = std::min(min_imz, min_eig_hermitian((zT - zT.adjoint()) / i2));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Tm);
    max_norm = std::max(max_norm, svd.singularValues()[0]);
  }
  ax.min_imag_T = min_im;
  ax.min_imag_zT = min_imz;
  ax.norm_T_excess = max_norm - 1.0 / z.imag();

  const Eigen::MatrixXcd& Tt = pair.T_tilde;
  ax.min_imag_T_tilde = min_eig_hermitian((Tt - Tt.adjoint()) / i2);
  const Eigen::MatrixXcd zTt = z * Tt;
  ax.min_imag_zT_tilde = min_eig_hermitian((zTt - zTt.adjoint()) / i2);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Tt);
  ax.norm_T_tilde_excess = svd.singularValues()[0] - 1.0 / z.imag();
  return ax;
}

std::string DetEquivReport::to_json() const {
  nlohmann::json j;
  auto carr = [](const std::vector<cplx>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& c : v) a.push_back({c.real(), c.imag()});
    return a;
  };
  j["z_grid"] = carr(z_grid);
  j["trace_T"] = carr(trace_T);
  j["mp_trace"] = carr(mp_trace);
  j["iterations"] = iterations;
  j["residuals"] = residuals;
  j["sq_dev_integral"] = sq_dev_int;
  j["mp_sq_dev"] = mp_sq_dev;
  j["correction"] = correction;
  return j.dump();
}

DetEquivReport detequiv_report(const ModelBank& bank, int L, int N,
                               const std::vector<cplx>& z_grid, const SolveOptions& opts,
                               ExecMode mode) {
  const CanonicalSystem sys(bank, L, N);
  const MPLaw mp(sys.c_N());
  DetEquivReport rep;
  rep.z_grid = z_grid;
  rep.trace_T.resize(z_grid.size());
  rep.mp_trace.resize(z_grid.size());
  rep.iterations.resize(z_grid.size());
  rep.residuals.resize(z_grid.size());
  std::vector<std::string> failures(z_grid.size());
  parallel_for(z_grid.size(), [&](size_t i) {
    try {
      // continuation from Im z = 1 guards the small-Im points of the grid
      const cplx z = rep.z_grid[i];
      StieltjesPair p = sys.solve(cplx(z.real(), std::max(1.0, z.imag())), opts);
      double y = std::max(1.0, z.imag());
      while (y > z.imag()) {
        y = std::max(z.imag(), 0.5 * y);
        p = sys.solve(cplx(z.real(), y), opts, &p);
      }
      rep.trace_T[i] = p.trace_T();
      rep.mp_trace[i] = mp.stieltjes_t(z);
      rep.iterations[i] = p.iterations;
      rep.residuals[i] = p.residual;
    } catch (const NoConvergence& e) {
      failures[i] = e.what();
    }
  }, mode);
  for (const auto& f : failures)
    if (!f.empty()) throw NoConvergence(f, opts.max_iter, 0.0);
  const SqDevIntegral sq = sq_dev_integral(bank, L, N);
  rep.sq_dev_int = sq.integral;
  rep.mp_sq_dev = sq.c_N;
  rep.correction = sq.correction;
  return rep;
}

}  // namespace bcorr
