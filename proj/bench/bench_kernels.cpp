// Timings of the OpenMP kernels against their serial reference paths.
// The outputs must agree exactly; the speedup column is the point.

#include <chrono>
#include <cstdio>
#include <functional>

#include "bcorr/detequiv.hpp"
#include "bcorr/harness.hpp"
#include "bcorr/sampling.hpp"
#include "bcorr/szego.hpp"
#include "bcorr/toeplitz.hpp"

using namespace bcorr;

namespace {

double time_it(const std::function<void()>& fn, int repeats = 3) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
  std::printf("%-34s %10.3f ms %10.3f ms %7.2fx  %s\n", name, 1e3 * serial_s, 1e3 * parallel_s,
              serial_s / parallel_s, identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
  std::printf("%-34s %13s %13s %8s\n", "kernel", "serial", "openmp", "speedup");

  {  // ensemble sampling, 64 heterogeneous-looking series
    const auto bank = ModelBank::repeated(CovarianceModel::ar1(cplx(0.5, 0.0)), 64);
    Ensemble a, b;
    const double ts = time_it([&] { a = sample_ensemble(bank, 2048, 8, 1, 0, ExecMode::serial); });
    const double tp = time_it([&] { b = sample_ensemble(bank, 2048, 8, 1, 0, ExecMode::openmp); });
    report("sample_ensemble 64x2055", ts, tp, (a.data - b.data).norm() == 0.0);
  }

  {  // diagonal averages of a large matrix
    GaussianStream g(2, 0, 0);
    Eigen::MatrixXcd M(1024, 1024);
    for (int i = 0; i < 1024; ++i)
      for (int j = 0; j < 1024; ++j) M(i, j) = g.next();
    Eigen::VectorXcd a, b;
    const double ts = time_it([&] { a = tau_all(M, ExecMode::serial); });
    const double tp = time_it([&] { b = tau_all(M, ExecMode::openmp); });
    report("tau_all 1024x1024", ts, tp, (a - b).norm() == 0.0);
  }

  {  // block inverse square roots
    const auto bank = ModelBank::repeated(CovarianceModel::ar1(cplx(0.6, 0.1)), 48);
    const auto ens = sample_ensemble(bank, 512, 16, 3);
    const auto cov = sample_cov(ens);
    BlockDiag a, b;
    const double ts = time_it([&] { a = block_inv_sqrt(cov, ExecMode::serial); });
    const double tp = time_it([&] { b = block_inv_sqrt(cov, ExecMode::openmp); });
    bool same = true;
    for (int m = 0; m < 48; ++m) same = same && (a[m] - b[m]).norm() == 0.0;
    report("block_inv_sqrt 48 blocks of 16", ts, tp, same);
  }

  {  // Monte Carlo replications of the mean-identity statistic
    MeanIdentityReport a, b;
    const double ts =
        time_it([&] { a = run_mean_identity(16, 4, 256, cplx(0.5, 0.0), 64, 4, ExecMode::serial); },
                1);
    const double tp =
        time_it([&] { b = run_mean_identity(16, 4, 256, cplx(0.5, 0.0), 64, 4, ExecMode::openmp); },
                1);
    report("mean-identity 64 replications", ts, tp, a.mc_mean == b.mc_mean);
  }

  {  // canonical solves across a z grid
    const auto bank = ModelBank::repeated(CovarianceModel::ar1(cplx(0.5, 0.0)), 8);
    std::vector<cplx> zs;
    for (int i = 0; i < 8; ++i) zs.emplace_back(0.25 + 0.5 * i, 0.2);
    DetEquivReport a, b;
    const double ts =
        time_it([&] { a = detequiv_report(bank, 8, 128, zs, {}, ExecMode::serial); }, 1);
    const double tp =
        time_it([&] { b = detequiv_report(bank, 8, 128, zs, {}, ExecMode::openmp); }, 1);
    bool same = true;
    for (size_t i = 0; i < zs.size(); ++i) same = same && a.trace_T[i] == b.trace_T[i];
    report("canonical solves, 8 z points", ts, tp, same);
  }

  return 0;
}
