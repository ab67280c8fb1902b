#include "bcorr/mplaw.hpp"

#include <cmath>
#include <numbers>

#include "bcorr/errors.hpp"

namespace bcorr {

namespace {

constexpr double pi = std::numbers::pi;

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(n);
  w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

}  // namespace

MPLaw::MPLaw(double c) : c_(c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("MP parameter c must be in (0, inf)");
  const double s = std::sqrt(c);
  lm_ = (1.0 - s) * (1.0 - s);
  lp_ = (1.0 + s) * (1.0 + s);
  atom_ = c > 1.0 ? 1.0 - 1.0 / c : 0.0;
}

cplx MPLaw::stieltjes_t(cplx z) const {
  if (!(z.imag() > 0.0)) throw DomainError("stieltjes_t requires Im z > 0");
  // z c t^2 + (z + c - 1) t + 1 = 0
  const cplx a = z * c_;
  const cplx b = z + c_ - 1.0;
  cplx disc = std::sqrt(b * b - 4.0 * a);
  if (std::real(std::conj(b) * disc) < 0.0) disc = -disc;  // avoid cancellation
  const cplx q = -0.5 * (b + disc);
  const cplx t1 = q / a;
  const cplx t2 = 1.0 / q;  // product of roots = 1/(zc)
  cplx t = (t1.imag() >= t2.imag()) ? t1 : t2;
  // Degenerate near-real case: follow the root continuously from Im z = 0.1.
  if (!(t.imag() > -1e-13) || std::abs(t1.imag() - t2.imag()) < 1e-13) {
    cplx ref = stieltjes_t(cplx(z.real(), 0.1 + z.imag()));
    double y = 0.1 + z.imag();
    while (y > z.imag() * 1.0000001) {
      y = std::max(z.imag(), y / 2.0);
      const cplx zz(z.real(), y);
      const cplx bb = zz + c_ - 1.0;
      cplx dd = std::sqrt(bb * bb - 4.0 * zz * c_);
      if (std::real(std::conj(bb) * dd) < 0.0) dd = -dd;
      const cplx qq = -0.5 * (bb + dd);
      const cplx r1 = qq / (zz * c_);
      const cplx r2 = 1.0 / qq;
      ref = (std::abs(r1 - ref) <= std::abs(r2 - ref)) ? r1 : r2;
    }
    t = ref;
  }
  return t;
}

cplx MPLaw::stieltjes_t_tilde(cplx z) const {
  return c_ * stieltjes_t(z) - (1.0 - c_) / z;
}

double MPLaw::density(double lambda) const {
  if (lambda <= lm_ || lambda >= lp_) return 0.0;
  return std::sqrt((lp_ - lambda) * (lambda - lm_)) / (2.0 * pi * c_ * lambda);
}

Eigen::VectorXd MPLaw::density(const Eigen::VectorXd& grid) const {
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) out[i] = density(grid[i]);
  return out;
}

double MPLaw::integrate(const std::function<double(double)>& phi) const {
  static thread_local Eigen::VectorXd gx, gw;
  if (gx.size() != 256) gauss_legendre(256, gx, gw);
  // lambda = lm + (lp - lm) sin^2(theta) removes both edge singularities
  double acc = 0.0;
  const double half = 0.25 * pi;  // theta = half * (x + 1), theta in [0, pi/2]
  for (Eigen::Index i = 0; i < gx.size(); ++i) {
    const double theta = half * (gx[i] + 1.0);
    const double st = std::sin(theta), ct = std::cos(theta);
    const double lam = lm_ + (lp_ - lm_) * st * st;
    acc += gw[i] * half * phi(lam) * (lp_ - lm_) * (lp_ - lm_) * st * st * ct * ct / (pi * c_ * lam);
  }
  if (atom_ > 0.0) acc += atom_ * phi(0.0);
  return acc;
}

double MPLaw::integrate(const std::string& name) const {
  if (name == "sq_dev") return c_;  // closed form; quadrature agreement is a test
  if (name == "mean") return integrate([](double l) { return l; });
  if (name == "one") return integrate([](double) { return 1.0; });
  if (name == "logdet") {
    if (atom_ > 0.0) throw DomainError("logdet diverges: MP law has an atom at 0 for c > 1");
    return integrate([](double l) { return std::log(l); });
  }
  throw DomainError("unknown statistic '" + name + "'");
}

double MPLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  double acc = atom_;
  if (x <= lm_) return acc;
  static thread_local Eigen::VectorXd gx, gw;
  if (gx.size() != 256) gauss_legendre(256, gx, gw);
  const double xc = std::min(x, lp_);
  const double theta_x = std::asin(std::sqrt((xc - lm_) / (lp_ - lm_)));
  const double half = 0.5 * theta_x;
  for (Eigen::Index i = 0; i < gx.size(); ++i) {
    const double theta = half * (gx[i] + 1.0);
    const double st = std::sin(theta), ct = std::cos(theta);
    const double lam = lm_ + (lp_ - lm_) * st * st;
    acc += gw[i] * half * (lp_ - lm_) * (lp_ - lm_) * st * st * ct * ct / (pi * c_ * lam);
  }
  return std::min(acc, 1.0);
}

}  // namespace bcorr
