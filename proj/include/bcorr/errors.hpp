#ifndef BCORR_ERRORS_HPP
#define BCORR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bcorr {

// Base for every failure the library raises on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A covariance sequence / spectral density failed the positivity checks.
struct PositivityError : Error {
  using Error::Error;
};

// A sample autocovariance block is too ill-conditioned to normalize.
struct SingularBlockError : Error {
  using Error::Error;
};

// Function evaluated outside its domain (log of a singular matrix, Im z <= 0, ...).
struct DomainError : Error {
  using Error::Error;
};

// Fourier grid too coarse for the requested Toeplitz size.
struct GridError : Error {
  using Error::Error;
};

// Levinson recursion produced a non-positive prediction-error variance.
struct NonPositiveVariance : Error {
  using Error::Error;
};

// Matrix expected to be Hermitian positive definite is not.
struct NotPositiveDefinite : Error {
  using Error::Error;
};

// Fixed-point iteration did not reach the tolerance within max_iter steps.
struct NoConvergence : Error {
  int iterations;
  double residual;
  NoConvergence(const std::string& msg, int iters, double res)
      : Error(msg), iterations(iters), residual(res) {}
};

// Malformed input file.
struct ParseError : Error {
  using Error::Error;
};

// Inconsistent matrix / sample dimensions.
struct DimensionError : Error {
  using Error::Error;
};

}  // namespace bcorr

#endif
