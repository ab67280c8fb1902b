#include "bcorr/szego.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "bcorr/errors.hpp"
#include "bcorr/toeplitz.hpp"

namespace bcorr {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

SzegoChain levinson(const CovarianceModel& model, int order) {
  if (order < 1) throw DimensionError("levinson needs order >= 1");
  const double r0 = model.r(0).real();
  if (!(r0 > 0.0)) throw NonPositiveVariance("levinson: r(0) must be positive");

  std::vector<cplx> r(static_cast<size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) r[static_cast<size_t>(k)] = model.r(k);

  SzegoChain chain;
  chain.order = order;
  chain.reflection.resize(order);
  chain.sigma2.resize(order + 1);
  chain.predictor.resize(static_cast<size_t>(order) + 1);
  chain.sigma2[0] = r0;
  chain.predictor[0] = Eigen::VectorXcd();

  // a[k-1] = a_{k,l}: coefficients of Phi*_l(z) = 1 + sum_k a_{k,l} z^k
  Eigen::VectorXcd a;
  for (int l = 0; l < order; ++l) {
    cplx num = r[static_cast<size_t>(l) + 1];
    for (int k = 1; k <= l; ++k) num += std::conj(a[k - 1]) * r[static_cast<size_t>(l + 1 - k)];
    const cplx alpha = num / chain.sigma2[l];
    if (!(std::abs(alpha) < 1.0))
      throw NonPositiveVariance("levinson: reflection coefficient magnitude " +
                                std::to_string(std::abs(alpha)) + " >= 1 at order " +
                                std::to_string(l));
    chain.reflection[l] = alpha;
    chain.sigma2[l + 1] = chain.sigma2[l] * (1.0 - std::norm(alpha));
    if (!(chain.sigma2[l + 1] > 0.0))
      throw NonPositiveVariance("levinson: sigma2 <= 0 at order " + std::to_string(l + 1));

    // Phi*_{l+1}(z) = Phi*_l(z) - conj(alpha) z Phi_l(z), with Phi_l the
    // reversed-conjugate of Phi*_l.
    Eigen::VectorXcd next(l + 1);
    for (int k = 1; k <= l + 1; ++k) {
      const cplx prev = (k <= l) ? a[k - 1] : cplx(0.0, 0.0);
      const cplx rev = (l + 1 - k <= l) ? ((l + 1 - k == 0) ? cplx(1.0, 0.0) : a[l + 1 - k - 1])
                                         : cplx(0.0, 0.0);
      next[k - 1] = prev - std::conj(alpha) * std::conj(rev);
    }
    a = std::move(next);
    chain.predictor[static_cast<size_t>(l) + 1] = a;
  }
  return chain;
}

double SzegoChain::quad_form(int L, double nu) const {
  if (L < 1 || L - 1 > order) throw DimensionError("quad_form: chain order too small for L");
  const cplx w = std::polar(1.0, two_pi * nu);
  cplx phi = 1.0;        // Phi_n(w)
  cplx phi_star = 1.0;   // Phi*_n(w)
  double sum = 1.0 / sigma2[0];
  for (int n = 0; n < L - 1; ++n) {
    const cplx alpha = reflection[n];
    const cplx phi_next = w * phi - alpha * phi_star;
    const cplx phi_star_next = phi_star - std::conj(alpha) * w * phi;
    phi = phi_next;
    phi_star = phi_star_next;
    sum += std::norm(phi_star) / sigma2[n + 1];
  }
  return sum / static_cast<double>(L);
}

std::pair<Eigen::MatrixXcd, Eigen::VectorXd> cholesky_inverse_factor(const CovarianceModel& model,
                                                                     int L) {
  if (L < 1) throw DimensionError("cholesky_inverse_factor needs L >= 1");
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(L, L);
  Eigen::VectorXd d(L);
  if (L == 1) {
    d[0] = model.r(0).real();
    return {A, d};
  }
  const SzegoChain chain = levinson(model, L - 1);
  d = chain.sigma2.head(L);
  for (int l = 1; l < L; ++l) {
    const Eigen::VectorXcd& a = chain.predictor[static_cast<size_t>(l)];
    for (int j = 0; j < l; ++j) A(j, l) = a[l - j - 1];  // A(j,l) = a_{l-j,l}
  }
  return {A, d};
}

double quad_form_identity(const CovarianceModel& model, int L, double nu) {
  if (L == 1) return 1.0 / model.r(0).real();
  return levinson(model, L - 1).quad_form(L, nu);
}

Eigen::VectorXd epsilon(const CovarianceModel& model, int L, const Eigen::VectorXd& nu_grid) {
  Eigen::VectorXd out(nu_grid.size());
  if (L == 1) {
    const double inv_r0 = 1.0 / model.r(0).real();
    for (Eigen::Index g = 0; g < nu_grid.size(); ++g)
      out[g] = model.spectral_density(nu_grid[g]) * inv_r0 - 1.0;
    return out;
  }
  const SzegoChain chain = levinson(model, L - 1);
  for (Eigen::Index g = 0; g < nu_grid.size(); ++g)
    out[g] = model.spectral_density(nu_grid[g]) * chain.quad_form(L, nu_grid[g]) - 1.0;
  return out;
}

std::string ErrorMatrixReport::to_json() const {
  nlohmann::json j;
  j["N"] = E_N.rows();
  j["grid_size"] = grid_size;
  j["sup_eps"] = sup_eps;
  j["trace_E"] = trace_E;
  j["correction"] = correction;
  return j.dump();
}

ErrorMatrixReport error_matrix(const ModelBank& bank, int L, int N, int grid_size,
                               ExecMode mode) {
  if (L < 1 || N < 1) throw DimensionError("error_matrix needs L >= 1 and N >= 1");
  const int G = grid_size > 0 ? grid_size : std::max({4096, 16 * L, 4 * N});
  if (G < 4 * N)
    throw GridError("error_matrix: grid size " + std::to_string(G) + " is below the 4N guard");
  Eigen::VectorXd nu(G);
  for (int g = 0; g < G; ++g) nu[g] = static_cast<double>(g) / static_cast<double>(G);

  ErrorMatrixReport rep;
  rep.grid_size = G;
  rep.eps_grid.resize(bank.size(), G);
  if (bank.all_identical()) {
    const Eigen::VectorXd row = epsilon(bank[0], L, nu);
    for (int m = 0; m < bank.size(); ++m) rep.eps_grid.row(m) = row;
  } else {
    parallel_for(static_cast<size_t>(bank.size()), [&](size_t m) {
      rep.eps_grid.row(static_cast<Eigen::Index>(m)) = epsilon(bank[static_cast<int>(m)], L, nu);
    }, mode);
  }
  rep.sup_eps = rep.eps_grid.cwiseAbs().maxCoeff();

  const Eigen::VectorXd mean_eps = rep.eps_grid.colwise().mean();
  const Eigen::VectorXcd coeffs = symbol_fourier_coeffs(mean_eps.cast<cplx>(), N);
  rep.E_N = toeplitz_from_coeffs(coeffs, N);

  rep.trace_E = static_cast<double>(N) * coeffs[N - 1].real();
  // (1/N) Tr(E (I + E)) through the diagonal coefficients: Tr E = N c(0) and
  // Tr E^2 = sum_l (N - |l|) c(l) c(-l).
  cplx tr2 = 0.0;
  for (int l = -(N - 1); l <= N - 1; ++l)
    tr2 += static_cast<double>(N - std::abs(l)) * coeffs[l + N - 1] * coeffs[-l + N - 1];
  rep.correction = coeffs[N - 1].real() + tr2.real() / static_cast<double>(N);
  return rep;
}

}  // namespace bcorr
