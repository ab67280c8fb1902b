#include "bcorr/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bcorr/errors.hpp"

namespace bcorr {

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "' for writing");
  f << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "' for writing");
  f << std::setprecision(17);
  return f;
}

}  // namespace

void write_histogram_csv(const std::string& path, const HistogramResult& h) {
  auto f = open_csv(path);
  f << "bin_left,bin_right,empirical_density,mp_density\n";
  for (Eigen::Index b = 0; b < h.emp_density.size(); ++b)
    f << h.bin_edges[b] << ',' << h.bin_edges[b + 1] << ',' << h.emp_density[b] << ','
      << h.mp_density[b] << '\n';
}

void write_error_curves_csv(const std::string& path, const ErrorCurves& curves) {
  auto f = open_csv(path);
  f << "beta,N,M,L,err_total,err1,err2,stderr1\n";
  for (const auto& c : curves.cells)
    f << c.beta << ',' << c.N << ',' << c.M << ',' << c.L << ',' << c.err_total << ',' << c.err1
      << ',' << c.err2 << ',' << c.stderr1 << '\n';
}

void write_eigenvalue_histogram_csv(const std::string& path, const SpectralStats& stats,
                                    int bins) {
  auto f = open_csv(path);
  f << "bin_left,bin_right,density\n";
  if (stats.eigenvalues.size() == 0) return;
  const double lo = stats.eigenvalues.minCoeff(), hi = stats.eigenvalues.maxCoeff();
  const int B = std::max(1, bins);
  const double width = (hi - lo) > 0 ? (hi - lo) / B : 1.0;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(B);
  for (Eigen::Index i = 0; i < stats.eigenvalues.size(); ++i) {
    int b = static_cast<int>((stats.eigenvalues[i] - lo) / width);
    counts[std::clamp(b, 0, B - 1)] += 1.0;
  }
  const double n = static_cast<double>(stats.eigenvalues.size());
  for (int b = 0; b < B; ++b)
    f << lo + width * b << ',' << lo + width * (b + 1) << ',' << counts[b] / (n * width) << '\n';
}

void write_density_csv(const std::string& path, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& mu_n, const Eigen::VectorXd& mp) {
  if (x.size() != mu_n.size() || x.size() != mp.size())
    throw DimensionError("write_density_csv: column lengths differ");
  auto f = open_csv(path);
  f << "x,density_muN,density_mp\n";
  for (Eigen::Index i = 0; i < x.size(); ++i)
    f << x[i] << ',' << mu_n[i] << ',' << mp[i] << '\n';
}

void write_eps_grid_csv(const std::string& path, const ErrorMatrixReport& rep) {
  auto f = open_csv(path);
  f << "nu";
  for (Eigen::Index m = 0; m < rep.eps_grid.rows(); ++m) f << ",eps_" << (m + 1);
  f << '\n';
  const int G = rep.grid_size;
  for (int g = 0; g < G; ++g) {
    f << static_cast<double>(g) / G;
    for (Eigen::Index m = 0; m < rep.eps_grid.rows(); ++m) f << ',' << rep.eps_grid(m, g);
    f << '\n';
  }
}

void write_mp_density_csv(const std::string& path, const MPLaw& law,
                          const Eigen::VectorXd& grid) {
  auto f = open_csv(path);
  f << "lambda,density\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    f << grid[i] << ',' << law.density(grid[i]) << '\n';
}

namespace {

cplx parse_complex_token(const std::string& raw, const std::string& path) {
  std::string t;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw ParseError(path + ": empty cell");
  // forms: "1.5", "1.5+0.25j", "1.5-0.25j", "0.25j", with i accepted for j
  char tail = t.back();
  if (tail == 'j' || tail == 'i' || tail == 'J' || tail == 'I') {
    t.pop_back();
    // split at the last +/- that is not an exponent sign or leading sign
    size_t split = std::string::npos;
    for (size_t k = t.size(); k-- > 1;) {
      if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
        split = k;
        break;
      }
    }
    try {
      if (split == std::string::npos) return {0.0, std::stod(t.empty() ? "1" : t)};
      const double re = std::stod(t.substr(0, split));
      std::string ims = t.substr(split);
      if (ims == "+") ims = "1";
      if (ims == "-") ims = "-1";
      return {re, std::stod(ims)};
    } catch (const std::exception&) {
      throw ParseError(path + ": malformed complex cell '" + raw + "'");
    }
  }
  try {
    return {std::stod(t), 0.0};
  } catch (const std::exception&) {
    throw ParseError(path + ": malformed cell '" + raw + "'");
  }
}

}  // namespace

Eigen::MatrixXcd read_complex_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!cells.empty()) rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  const size_t width = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != width) throw ParseError(path + ": ragged rows");

  // complex tokens anywhere => token layout; otherwise pairs of re,im columns
  bool has_complex_token = false;
  for (const auto& r : rows)
    for (const auto& c : r) {
      const char tail = c.empty() ? ' ' : c.back();
      if (tail == 'j' || tail == 'i' || tail == 'J' || tail == 'I') has_complex_token = true;
    }

  if (has_complex_token || width % 2 == 1) {
    Eigen::MatrixXcd out(rows.size(), width);
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < width; ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            parse_complex_token(rows[i][j], path);
    return out;
  }
  Eigen::MatrixXcd out(rows.size(), width / 2);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < width / 2; ++j) {
      const cplx re = parse_complex_token(rows[i][2 * j], path);
      const cplx im = parse_complex_token(rows[i][2 * j + 1], path);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cplx(re.real(), im.real());
    }
  }
  return out;
}

}  // namespace bcorr
