#ifndef BCORR_IO_HPP
#define BCORR_IO_HPP

#include <string>

#include "bcorr/detequiv.hpp"
#include "bcorr/harness.hpp"
#include "bcorr/model.hpp"
#include "bcorr/sampling.hpp"
#include "bcorr/szego.hpp"

namespace bcorr {

// FNV-1a 64-bit, used as the manifest's content hash of the resolved config.
std::uint64_t fnv1a(const std::string& data);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// fig1 CSV: bin_left, bin_right, empirical_density, mp_density
void write_histogram_csv(const std::string& path, const HistogramResult& h);

// fig2 CSV: beta, N, M, L, err_total, err1, err2, stderr1
void write_error_curves_csv(const std::string& path, const ErrorCurves& curves);

// eigenvalue histogram for a stats record: bin_left, bin_right, density
void write_eigenvalue_histogram_csv(const std::string& path, const SpectralStats& stats, int bins);

// density curves: x, density_muN, density_mp
void write_density_csv(const std::string& path, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& mu_n, const Eigen::VectorXd& mp);

// epsilon grid dump: nu, eps_1 .. eps_M
void write_eps_grid_csv(const std::string& path, const ErrorMatrixReport& rep);

// MP density samples: lambda, density
void write_mp_density_csv(const std::string& path, const MPLaw& law, const Eigen::VectorXd& grid);

/// CSV data for the uncorrelatedness test: M rows, each N+L-1 complex samples.
/// Cells are either "re+imj" / "re-imj" tokens or consecutive re,im column
/// pairs (the whole file must use one of the two layouts).
Eigen::MatrixXcd read_complex_csv(const std::string& path);

}  // namespace bcorr

#endif
