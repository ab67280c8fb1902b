#include "bcorr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <json.hpp>

namespace bcorr {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------------------
// CovarianceModel

CovarianceModel CovarianceModel::white() {
  CovarianceModel m;
  m.kind_ = Kind::white;
  m.s_min_ = m.s_max_ = 1.0;
  return m;
}

CovarianceModel CovarianceModel::ar1(cplx rho) {
  if (std::abs(rho) >= 1.0)
    throw DomainError("ar1 model requires |rho| < 1, got |rho| = " + std::to_string(std::abs(rho)));
  CovarianceModel m;
  m.kind_ = Kind::ar1;
  m.rho_ = rho;
  const double a = std::abs(rho);
  // |1 - rho e^{-2 pi i nu}|^2 sweeps [(1-|rho|)^2, (1+|rho|)^2]
  m.s_min_ = (1.0 - a) / (1.0 + a);
  m.s_max_ = (1.0 + a) / (1.0 - a);
  return m;
}

CovarianceModel CovarianceModel::custom(const std::vector<cplx>& r_two_sided) {
  if (r_two_sided.empty() || r_two_sided.size() % 2 == 0)
    throw DimensionError("custom covariance needs an odd-length two-sided sequence r(-K..K)");
  CovarianceModel m;
  m.kind_ = Kind::custom;
  m.r_ = r_two_sided;
  m.max_lag_ = static_cast<long>(r_two_sided.size() / 2);
  m.validate();
  return m;
}

void CovarianceModel::validate() {
  // Hermitian symmetry, then symmetrize exactly.
  const long K = max_lag_;
  double scale = 0.0;
  for (const auto& v : r_) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw PositivityError("custom covariance sequence is identically zero");
  for (long k = 1; k <= K; ++k) {
    const cplx a = r_[static_cast<size_t>(K + k)];
    const cplx b = r_[static_cast<size_t>(K - k)];
    if (std::abs(b - std::conj(a)) > 1e-12 * scale)
      throw PositivityError("custom covariance sequence is not Hermitian symmetric at lag " +
                            std::to_string(k));
    r_[static_cast<size_t>(K - k)] = std::conj(a);
  }
  if (std::abs(r_[static_cast<size_t>(K)].imag()) > 1e-12 * scale)
    throw PositivityError("custom covariance r(0) must be real");
  r_[static_cast<size_t>(K)] = cplx(r_[static_cast<size_t>(K)].real(), 0.0);

  // Truncated spectral density on an 8192-point grid must be positive...
  const int G = 8192;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int g = 0; g < G; ++g) {
    const double s = spectral_density(static_cast<double>(g) / G);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (!(lo > 0.0))
    throw PositivityError("custom spectral density is not positive (min = " + std::to_string(lo) + ")");
  s_min_ = lo;
  s_max_ = hi;

  // ... and a 256x256 Toeplitz section must admit a Cholesky factorization.
  const int probe = 256;
  Eigen::MatrixXcd R(probe, probe);
  for (int i = 0; i < probe; ++i)
    for (int j = 0; j < probe; ++j) R(i, j) = r(i - j);
  Eigen::LLT<Eigen::MatrixXcd> llt(R);
  if (llt.info() != Eigen::Success)
    throw PositivityError("custom covariance: Cholesky of the 256x256 Toeplitz section failed");
}

cplx CovarianceModel::r(long k) const {
  switch (kind_) {
    case Kind::white:
      return k == 0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    case Kind::ar1: {
      const cplx v = std::pow(rho_, static_cast<double>(std::labs(k)));
      return k >= 0 ? v : std::conj(v);
    }
    case Kind::custom:
      if (std::labs(k) > max_lag_) return cplx(0.0, 0.0);
      return r_[static_cast<size_t>(max_lag_ + k)];
  }
  return cplx(0.0, 0.0);
}

long CovarianceModel::support() const {
  switch (kind_) {
    case Kind::white: return 0;
    case Kind::ar1: return -1;  // unbounded
    case Kind::custom: return max_lag_;
  }
  return 0;
}

std::vector<cplx> CovarianceModel::covariance_sequence(int max_lag) const {
  if (max_lag < 0) throw DimensionError("max_lag must be >= 0");
  std::vector<cplx> out(static_cast<size_t>(2 * max_lag + 1));
  for (int k = -max_lag; k <= max_lag; ++k) out[static_cast<size_t>(k + max_lag)] = r(k);
  return out;
}

Eigen::MatrixXcd CovarianceModel::toeplitz_covariance(int size) const {
  if (size < 1) throw DimensionError("toeplitz_covariance needs size >= 1");
  std::vector<cplx> col(static_cast<size_t>(size));
  for (int k = 0; k < size; ++k) col[static_cast<size_t>(k)] = r(k);
  Eigen::MatrixXcd R(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j <= i; ++j) {
      R(i, j) = col[static_cast<size_t>(i - j)];
      R(j, i) = std::conj(R(i, j));
    }
  }
  if (kind_ == Kind::custom) {
    Eigen::LLT<Eigen::MatrixXcd> llt(R);
    if (llt.info() != Eigen::Success)
      throw PositivityError("Toeplitz covariance section is not positive definite");
  }
  return R;
}

double CovarianceModel::spectral_density(double nu) const {
  switch (kind_) {
    case Kind::white:
      return 1.0;
    case Kind::ar1: {
      const cplx d = cplx(1.0, 0.0) - rho_ * std::polar(1.0, -two_pi * nu);
      return (1.0 - std::norm(rho_)) / std::norm(d);
    }
    case Kind::custom: {
      // S(nu) = r(0) + 2 Re sum_{k>=1} r(k) e^{-2 pi i nu k}
      double s = r_[static_cast<size_t>(max_lag_)].real();
      for (long k = 1; k <= max_lag_; ++k)
        s += 2.0 * std::real(r_[static_cast<size_t>(max_lag_ + k)] * std::polar(1.0, -two_pi * nu * static_cast<double>(k)));
      return s;
    }
  }
  return 0.0;
}

Eigen::VectorXd CovarianceModel::spectral_density(const Eigen::VectorXd& nu_grid) const {
  Eigen::VectorXd out(nu_grid.size());
  for (Eigen::Index i = 0; i < nu_grid.size(); ++i) {
    const double nu = nu_grid[i];
    if (nu < 0.0 || nu >= 1.0) throw DomainError("frequency grid values must lie in [0,1)");
    out[i] = spectral_density(nu);
    if (!(out[i] > 0.0)) throw PositivityError("spectral density non-positive at nu = " + std::to_string(nu));
  }
  return out;
}

bool CovarianceModel::operator==(const CovarianceModel& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::white: return true;
    case Kind::ar1: return rho_ == o.rho_;
    case Kind::custom: return r_ == o.r_;
  }
  return false;
}

std::string CovarianceModel::to_string() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::white: os << "white"; break;
    case Kind::ar1: os << "ar1(" << rho_.real() << (rho_.imag() < 0 ? "" : "+") << rho_.imag() << "i)"; break;
    case Kind::custom: os << "custom(K=" << max_lag_ << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// ModelBank

bool ModelBank::all_identical() const {
  for (size_t i = 1; i < models.size(); ++i)
    if (!(models[i] == models[0])) return false;
  return true;
}

double ModelBank::s_min() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& m : models) v = std::min(v, m.s_min());
  return v;
}

double ModelBank::s_max() const {
  double v = 0.0;
  for (const auto& m : models) v = std::max(v, m.s_max());
  return v;
}

namespace {

nlohmann::json model_to_json(const CovarianceModel& m) {
  nlohmann::json j;
  switch (m.kind()) {
    case CovarianceModel::Kind::white:
      j["kind"] = "white";
      break;
    case CovarianceModel::Kind::ar1:
      j["kind"] = "ar1";
      j["rho"] = {m.rho().real(), m.rho().imag()};
      break;
    case CovarianceModel::Kind::custom: {
      j["kind"] = "custom";
      auto r = m.covariance_sequence(static_cast<int>(m.support()));
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& v : r) arr.push_back({v.real(), v.imag()});
      j["r"] = arr;
      break;
    }
  }
  return j;
}

CovarianceModel model_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "white") return CovarianceModel::white();
  if (kind == "ar1") {
    const auto& rho = j.at("rho");
    if (rho.is_number()) return CovarianceModel::ar1(cplx(rho.get<double>(), 0.0));
    return CovarianceModel::ar1(cplx(rho.at(0).get<double>(), rho.at(1).get<double>()));
  }
  if (kind == "custom") {
    std::vector<cplx> r;
    for (const auto& v : j.at("r")) {
      if (v.is_number())
        r.emplace_back(v.get<double>(), 0.0);
      else
        r.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    }
    return CovarianceModel::custom(r);
  }
  throw ParseError("unknown model kind '" + kind + "'");
}

}  // namespace

std::string ModelBank::to_json() const {
  nlohmann::json j;
  j["M"] = size();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : models) arr.push_back(model_to_json(m));
  j["models"] = arr;
  return j.dump();
}

ModelBank ModelBank::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model bank JSON: ") + e.what());
  }
  try {
    std::vector<CovarianceModel> models;
    if (j.contains("repeat") && j["repeat"].is_object()) {
      const int M = j.at("M").get<int>();
      if (M < 1) throw DimensionError("model bank needs M >= 1");
      return ModelBank::repeated(model_from_json(j["repeat"]), M);
    }
    for (const auto& mj : j.at("models")) models.push_back(model_from_json(mj));
    if (j.value("repeat", false)) {
      if (models.size() != 1)
        throw ParseError("\"repeat\": true expects exactly one entry in \"models\"");
      return ModelBank::repeated(models[0], j.at("M").get<int>());
    }
    if (j.contains("M") && j["M"].get<int>() != static_cast<int>(models.size()))
      throw DimensionError("model bank: \"M\" does not match the number of models");
    return ModelBank(std::move(models));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model bank JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Sampling

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t series, std::uint64_t replication)
    : gauss_(0.0, std::sqrt(0.5)) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(series), static_cast<std::uint32_t>(series >> 32),
      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32)};
  engine_.seed(seq);
}

cplx GaussianStream::next() {
  const double re = gauss_(engine_);
  const double im = gauss_(engine_);
  return {re, im};
}

std::uint64_t GaussianStream::raw() { return engine_(); }

PathSampler::PathSampler(const ModelBank& bank, int length) : bank_(bank), n_(length) {
  if (length < 1) throw DimensionError("PathSampler needs length >= 1");
  factor_index_.assign(static_cast<size_t>(bank.size()), -1);
  for (int m = 0; m < bank.size(); ++m) {
    if (bank[m].kind() != CovarianceModel::Kind::custom) continue;
    // share the factor between identical models
    int found = -1;
    for (int m2 = 0; m2 < m; ++m2)
      if (factor_index_[static_cast<size_t>(m2)] >= 0 && bank[m2] == bank[m]) {
        found = factor_index_[static_cast<size_t>(m2)];
        break;
      }
    if (found >= 0) {
      factor_index_[static_cast<size_t>(m)] = found;
      continue;
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(bank[m].toeplitz_covariance(length));
    if (llt.info() != Eigen::Success)
      throw PositivityError("Toeplitz covariance factorization failed for model " + bank[m].to_string());
    factor_index_[static_cast<size_t>(m)] = static_cast<int>(factors_.size());
    factors_.push_back(llt.matrixL());
  }
}

void PathSampler::sample_row(int m, std::uint64_t seed, std::uint64_t replication, cplx* out) const {
  GaussianStream g(seed, static_cast<std::uint64_t>(m), replication);
  const auto& model = bank_[m];
  switch (model.kind()) {
    case CovarianceModel::Kind::white: {
      for (int t = 0; t < n_; ++t) out[t] = g.next();
      return;
    }
    case CovarianceModel::Kind::ar1: {
      // The AR recursion applies the (analytic) lower Cholesky factor of the
      // Toeplitz covariance: y_0 = z_0, y_t = rho y_{t-1} + sqrt(1-|rho|^2) z_t.
      const cplx rho = model.rho();
      const double c = std::sqrt(1.0 - std::norm(rho));
      cplx y = g.next();
      out[0] = y;
      for (int t = 1; t < n_; ++t) {
        y = rho * y + c * g.next();
        out[t] = y;
      }
      return;
    }
    case CovarianceModel::Kind::custom: {
      const Eigen::MatrixXcd& Lf = factors_[static_cast<size_t>(factor_index_[static_cast<size_t>(m)])];
      Eigen::VectorXcd z(n_);
      for (int t = 0; t < n_; ++t) z[t] = g.next();
      Eigen::Map<Eigen::VectorXcd>(out, n_) = Lf.triangularView<Eigen::Lower>() * z;
      return;
    }
  }
}

Ensemble sample_ensemble(const ModelBank& bank, int N, int L, std::uint64_t seed,
                         std::uint64_t replication, ExecMode mode) {
  if (N < 1 || L < 1) throw DimensionError("sample_ensemble needs N >= 1 and L >= 1");
  const int n = N + L - 1;
  PathSampler sampler(bank, n);
  Ensemble ens;
  ens.M = bank.size();
  ens.N = N;
  ens.L = L;
  ens.seed = seed;
  ens.replication = replication;
  ens.data.resize(bank.size(), n);
  parallel_for(static_cast<size_t>(bank.size()), [&](size_t m) {
    std::vector<cplx> row(static_cast<size_t>(n));
    sampler.sample_row(static_cast<int>(m), seed, replication, row.data());
    ens.data.row(static_cast<Eigen::Index>(m)) =
        Eigen::Map<const Eigen::RowVectorXcd>(row.data(), n);
  }, mode);
  return ens;
}

}  // namespace bcorr
