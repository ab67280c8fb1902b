#ifndef BCORR_MPLAW_HPP
#define BCORR_MPLAW_HPP

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "bcorr/model.hpp"

namespace bcorr {

/// Marchenko-Pastur law of parameter c: the limit eigenvalue distribution of
/// (1/K) X X^H with X of shape J x K, J/K -> c.  Absolutely continuous part
/// on [(1-sqrt(c))^2, (1+sqrt(c))^2] plus an atom of mass 1 - 1/c at zero
/// when c > 1.
class MPLaw {
 public:
  explicit MPLaw(double c);

  double c() const { return c_; }
  double lambda_minus() const { return lm_; }
  double lambda_plus() const { return lp_; }
  double atom_mass() const { return atom_; }

  /// Stieltjes transform t(z), Im z > 0: the root of t = 1/(-z + 1/(1+c t))
  /// with Im t >= 0.  Throws DomainError if Im z <= 0.
  cplx stieltjes_t(cplx z) const;

  /// t~(z) = c t(z) - (1-c)/z, the Stieltjes transform of c mu_mp + (1-c) delta_0.
  cplx stieltjes_t_tilde(cplx z) const;

  double density(double lambda) const;
  Eigen::VectorXd density(const Eigen::VectorXd& lambda_grid) const;

  /// CDF including the atom at zero.
  double cdf(double x) const;

  /// Integral of phi against the law (atom included).  The built-in "sq_dev"
  /// short-circuits to the closed form c.
  double integrate(const std::function<double(double)>& phi) const;
  double integrate(const std::string& name) const;

 private:
  double c_, lm_, lp_, atom_;
};

}  // namespace bcorr

#endif
