#include "bcorr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "bcorr/detequiv.hpp"
#include "bcorr/errors.hpp"

namespace bcorr {

CovarianceModel experiment_model(cplx rho) {
  return rho == cplx(0.0, 0.0) ? CovarianceModel::white() : CovarianceModel::ar1(rho);
}

int nearest_int(double x) { return static_cast<int>(std::llround(x)); }

void ExperimentConfig::validate() const {
  if (reps < 1) throw DimensionError("experiment needs reps >= 1");
  if (!(c_star > 0.0)) throw DomainError("c_star must be positive");
  for (double b : beta_list)
    if (!(b > 0.0 && b < 1.0)) throw DomainError("beta values must lie in (0,1)");
  if (N_list.empty() || beta_list.empty()) throw DimensionError("empty N or beta list");
  if (statistic != "sq_dev")
    throw DomainError("error curves are defined for the sq_dev statistic only");
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["c_star"] = c_star;
  j["N_list"] = N_list;
  j["beta_list"] = beta_list;
  j["rho"] = {rho.real(), rho.imag()};
  j["reps"] = reps;
  j["seed"] = seed;
  j["statistic"] = statistic;
  j["outputs"] = outputs;
  j["bins"] = bins;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("c_star")) c.c_star = j["c_star"].get<double>();
    if (j.contains("N_list")) c.N_list = j["N_list"].get<std::vector<int>>();
    if (j.contains("beta_list")) c.beta_list = j["beta_list"].get<std::vector<double>>();
    if (j.contains("rho")) {
      if (j["rho"].is_number())
        c.rho = cplx(j["rho"].get<double>(), 0.0);
      else
        c.rho = cplx(j["rho"][0].get<double>(), j["rho"][1].get<double>());
    }
    if (j.contains("reps")) c.reps = j["reps"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("statistic")) c.statistic = j["statistic"].get<std::string>();
    if (j.contains("outputs")) c.outputs = j["outputs"].get<std::string>();
    if (j.contains("bins")) c.bins = j["bins"].get<int>();
    for (auto& [key, val] : j.items()) {
      (void)val;
      static const std::vector<std::string> known{"c_star", "N_list", "beta_list", "rho",
                                                  "reps",   "seed",   "statistic", "outputs",
                                                  "bins"};
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ParseError("experiment config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  return c;
}

namespace {

// phi_hat with phi = (lambda-1)^2 equals the normalized off-diagonal energy
// (1/ML) ||X - I||_F^2; eigen_stats asserts this identity in the tests.
double sq_dev_stat(const BlockHermitian& X) {
  const Eigen::Index d = X.dim();
  return (X.mat - Eigen::MatrixXcd::Identity(d, d)).squaredNorm() / static_cast<double>(d);
}

struct RepStats {
  std::vector<double> values;
  int dropped = 0;
};

// Per-replication phi_hat over the sample block correlation matrix; SingularBlockError
// drops the replication.
RepStats replicate_sq_dev(const ModelBank& bank, int N, int L, int reps, std::uint64_t seed,
                          bool oracle_normalization, ExecMode mode) {
  std::vector<double> vals(static_cast<size_t>(reps), std::numeric_limits<double>::quiet_NaN());
  // one shared path sampler: Toeplitz factors are per-bank, not per-rep
  parallel_for(static_cast<size_t>(reps), [&](size_t r) {
    try {
      const Ensemble ens = sample_ensemble(bank, N, L, seed, r, ExecMode::serial);
      const BlockHermitian cov = sample_cov(ens);
      const BlockHermitian corr =
          oracle_normalization ? oracle_block_corr(cov, bank) : sample_block_corr(cov);
      vals[r] = sq_dev_stat(corr);
    } catch (const SingularBlockError&) {
      // dropped below
    }
  }, mode);
  RepStats out;
  out.values.reserve(vals.size());
  for (double v : vals) {
    if (std::isnan(v))
      ++out.dropped;
    else
      out.values.push_back(v);
  }
  return out;
}

double rms(const std::vector<double>& v, double center) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double x : v) acc += (x - center) * (x - center);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

HistogramResult run_histogram(int M, int N, int L, cplx rho, int reps, int bins,
                              std::uint64_t seed, ExecMode mode) {
  if (reps < 1) throw DimensionError("run_histogram needs reps >= 1");
  const ModelBank bank = ModelBank::repeated(experiment_model(rho), M);
  const Eigen::Index ml = static_cast<Eigen::Index>(M) * L;

  std::vector<Eigen::VectorXd> eigs(static_cast<size_t>(reps));
  parallel_for(static_cast<size_t>(reps), [&](size_t r) {
    try {
      const Ensemble ens = sample_ensemble(bank, N, L, seed, r, ExecMode::serial);
      const BlockHermitian corr = sample_block_corr(ens);
      eigs[r] = eigen_stats(corr, {}, N).eigenvalues;
    } catch (const SingularBlockError&) {
      eigs[r] = Eigen::VectorXd();
    }
  }, mode);

  HistogramResult out;
  out.M = M;
  out.N = N;
  out.L = L;
  out.reps = reps;
  out.c_N = static_cast<double>(M) * L / N;

  std::vector<double> pooled;
  pooled.reserve(static_cast<size_t>(reps) * static_cast<size_t>(ml));
  for (const auto& e : eigs) {
    if (e.size() == 0) {
      ++out.dropped;
      continue;
    }
    for (Eigen::Index i = 0; i < e.size(); ++i)
      pooled.push_back(std::abs(e[i]) < 1e-10 ? 0.0 : e[i]);  // snap rank-deficiency noise
  }
  if (pooled.empty()) throw SingularBlockError("run_histogram: every replication was dropped");
  std::sort(pooled.begin(), pooled.end());
  const auto n = static_cast<double>(pooled.size());

  int B = bins;
  if (B <= 0) {
    // Freedman-Diaconis
    const double q1 = pooled[static_cast<size_t>(0.25 * (n - 1))];
    const double q3 = pooled[static_cast<size_t>(0.75 * (n - 1))];
    const double h = 2.0 * (q3 - q1) / std::cbrt(n);
    B = h > 0 ? std::max(8, static_cast<int>(std::ceil((pooled.back() - pooled.front()) / h))) : 64;
  }
  const double lo = pooled.front(), hi = pooled.back();
  const double width = (hi - lo) > 0 ? (hi - lo) / B : 1.0;
  out.bin_edges.resize(B + 1);
  for (int b = 0; b <= B; ++b) out.bin_edges[b] = lo + width * b;
  out.emp_density = Eigen::VectorXd::Zero(B);
  for (double x : pooled) {
    int b = static_cast<int>((x - lo) / width);
    b = std::clamp(b, 0, B - 1);
    out.emp_density[b] += 1.0;
  }
  out.emp_density /= n * width;

  const MPLaw mp(out.c_N);
  out.mp_density.resize(B);
  for (int b = 0; b < B; ++b) out.mp_density[b] = mp.density(lo + width * (b + 0.5));

  // sup |F_n - F| with ties grouped; the reference law has an atom at zero
  // when c_N > 1, so the left comparison uses F(v-) there.
  double ks = 0.0;
  size_t i = 0;
  while (i < pooled.size()) {
    size_t j = i;
    while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
    const double v = pooled[i];
    const double F = mp.cdf(v);
    const double F_left = (v == 0.0) ? F - mp.atom_mass() : F;
    ks = std::max(ks, std::abs(static_cast<double>(j) / n - F));
    ks = std::max(ks, std::abs(static_cast<double>(i) / n - F_left));
    i = j;
  }
  out.ks = ks;
  return out;
}

ErrorCurves run_error_curves(const ExperimentConfig& config, ExecMode mode) {
  config.validate();
  ErrorCurves out;
  for (int N : config.N_list) {
    for (double beta : config.beta_list) {
      const double cn = config.c_star * N;
      const int M = nearest_int(std::pow(cn, 1.0 - beta));
      const int L = nearest_int(std::pow(cn, beta));
      if (M < 2 || L < 1) {
        std::ostringstream os;
        os << "skipped N=" << N << " beta=" << beta << " (M=" << M << ", L=" << L << ")";
        out.skipped.push_back(os.str());
        continue;
      }
      const ModelBank bank = ModelBank::repeated(experiment_model(config.rho), M);
      const SqDevIntegral exact = sq_dev_integral(bank, L, N);
      // fold the cell coordinates into the stream key so cells are independent
      const std::uint64_t cell_seed =
          config.seed ^ (static_cast<std::uint64_t>(N) << 32) ^
          (static_cast<std::uint64_t>(nearest_int(beta * 1000)) << 16);
      const RepStats reps = replicate_sq_dev(bank, N, L, config.reps, cell_seed, false, mode);

      ErrorCurveCell cell;
      cell.N = N;
      cell.beta = beta;
      cell.M = M;
      cell.L = L;
      cell.c_N = exact.c_N;
      cell.err_total = rms(reps.values, exact.c_N);
      cell.err1 = rms(reps.values, exact.integral);
      cell.err2 = std::abs(exact.correction);
      cell.stderr1 = sd_of(reps.values) / std::sqrt(static_cast<double>(reps.values.size()));
      cell.dropped = reps.dropped;
      out.cells.push_back(cell);
    }
  }
  return out;
}

std::optional<CrossoverEstimate> crossover_estimate(const ErrorCurves& curves, int N) {
  std::vector<const ErrorCurveCell*> cells;
  for (const auto& c : curves.cells)
    if (c.N == N) cells.push_back(&c);
  std::sort(cells.begin(), cells.end(),
            [](const ErrorCurveCell* a, const ErrorCurveCell* b) { return a->beta < b->beta; });
  for (size_t i = 0; i + 1 < cells.size(); ++i) {
    const auto &a = *cells[i], &b = *cells[i + 1];
    if (!(a.err2 > 0.0) || !(b.err2 > 0.0)) return std::nullopt;  // white noise: no crossover
    const double fa = std::log(a.err1) - std::log(a.err2);
    const double fb = std::log(b.err1) - std::log(b.err2);
    if (fa == 0.0) return CrossoverEstimate{a.beta, a.beta, b.beta};
    if (fa < 0.0 && fb >= 0.0) {
      const double t = fa / (fa - fb);
      return CrossoverEstimate{a.beta + t * (b.beta - a.beta), a.beta, b.beta};
    }
  }
  return std::nullopt;
}

std::string MeanIdentityReport::to_json() const {
  nlohmann::json j;
  j["M"] = M;
  j["L"] = L;
  j["N"] = N;
  j["reps"] = reps;
  j["mc_mean"] = mc_mean;
  j["mc_stderr"] = mc_stderr;
  j["exact"] = exact;
  j["c_N"] = c_N;
  j["z_score"] = z_score;
  j["infinite_width"] = infinite_width;
  return j.dump(2);
}

MeanIdentityReport run_mean_identity(int M, int L, int N, cplx rho, int reps, std::uint64_t seed,
                                     ExecMode mode) {
  if (reps < 1) throw DimensionError("run_mean_identity needs reps >= 1");
  const ModelBank bank = ModelBank::repeated(experiment_model(rho), M);
  const SqDevIntegral exact = sq_dev_integral(bank, L, N);
  const RepStats stats = replicate_sq_dev(bank, N, L, reps, seed, true, mode);

  MeanIdentityReport rep;
  rep.M = M;
  rep.L = L;
  rep.N = N;
  rep.reps = reps;
  rep.exact = exact.integral;
  rep.c_N = exact.c_N;
  rep.mc_mean = mean_of(stats.values);
  rep.infinite_width = stats.values.size() < 2;
  if (rep.infinite_width) {
    rep.mc_stderr = std::numeric_limits<double>::infinity();
    rep.z_score = 0.0;
  } else {
    rep.mc_stderr = sd_of(stats.values) / std::sqrt(static_cast<double>(stats.values.size()));
    rep.z_score = (rep.mc_mean - rep.exact) / rep.mc_stderr;
  }
  return rep;
}

}  // namespace bcorr
