#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lcft/flow.hpp"
#include "lcft/kernels.hpp"
#include "lcft/model.hpp"

namespace lcft {

// Zero mode c plus phi_1..phi_N (phi[0] unused); phi_{-n} = conj(phi_n).
struct CircleField {
  double c = 0;
  std::vector<cplx> phi;

  CircleField() = default;
  explicit CircleField(int N) : phi(N + 1, 0) {}
  int N() const { return phi.empty() ? 0 : static_cast<int>(phi.size()) - 1; }
  double value(double theta) const;  // c + sum_{n != 0} phi_n e^{i n theta}
};

// Named, counter-based sub-streams of one master seed. A (name, block)
// pair always yields the same generator, whichever worker asks for it.
class RngStreams {
 public:
  explicit RngStreams(std::uint64_t seed) : seed_(seed) {}
  std::mt19937_64 stream(const std::string& name, std::uint64_t block = 0) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// x_n, y_n standard normal, phi_n = (x_n + i y_n) / (2 sqrt n); c = 0.
CircleField sample_phi(int N, std::mt19937_64& rng);
double harmonic_extension(const CircleField& phi, cplx z);

struct ProcessOptions {
  int M = 512;  // circle nodes for the mean-part transforms (>= 512)
  double jitter = 1e-12;
  CovarianceOptions cov{};
};

// (B_t, phi_t) = ((P phi + X_D) o f_t + Q log|f_t'|/|f_t|) on the circle,
// truncated to modes 0..N. The mean part is linear in phi and precomputed.
class ProcessSampler {
 public:
  ProcessSampler(const VectorField& v, double t, int N, double Q, const ProcessOptions& opt = {});

  int N() const { return N_; }
  int dim() const { return 2 * N_ + 1; }  // real fluctuation coordinates
  // Mean zero mode and mean phi_t given phi.
  std::pair<double, CircleField> mean(const CircleField& phi) const;
  // Deterministic given a standard normal vector z of length dim().
  std::pair<double, CircleField> draw(const CircleField& phi, const Eigen::VectorXd& z) const;
  std::pair<double, CircleField> sample(const CircleField& phi, std::mt19937_64& rng) const;
  const Eigen::MatrixXd& real_covariance() const { return cov_; }

 private:
  int N_;
  double t_;
  Eigen::MatrixXcd A_;       // A(n, k) = [f_t^k]_n, 1 <= k <= n <= N
  std::vector<cplx> shift_;  // modes 0..N of Q log|f'|/|f|
  Eigen::MatrixXd cov_, L_;
};

std::pair<double, CircleField> sample_process(const VectorField& v, double t, const CircleField& phi, double Q,
                                              std::mt19937_64& rng, int N = -1);

// Real covariance of (X_0, Re X_1..N, Im X_1..N) from C(n, m) = E[X_n conj X_m].
Eigen::MatrixXd real_mode_covariance(const Eigen::MatrixXcd& C, int N);
// Lower Cholesky factor, retrying once with diagonal jitter.
Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& S, double jitter, const std::string& who);

// ---- disk field ----

struct DiskCell {
  cplx center;
  double r_in, r_out, th_in, th_out;
};

// Polar rings of width dr over [r_in, r_out]; each ring gets about 2 pi r / dr
// cells (at least 4, at most k_max). eps = dr / 3 keeps regularization
// circles disjoint and inside the disk.
struct DiskGrid {
  std::vector<DiskCell> cells;
  double dr = 0, eps = 0;
  std::size_t size() const { return cells.size(); }
};
DiskGrid make_disk_grid(int n_r, double r_in = 0.0, double r_out = 1.0, int k_max = 512);

// Integral of |x|^{-p} over the cell.
double cell_weight(const DiskCell& c, double p);

// Circle-average covariance: G_D off the diagonal, log(1/eps) + log(1 - |z|^2) on it.
Eigen::MatrixXd disk_covariance(const DiskGrid& g);

struct DiskSample {
  Eigen::VectorXd values;
  double eps = 0;
};

class DiskGffSampler {
 public:
  explicit DiskGffSampler(const DiskGrid& g);
  const DiskGrid& grid() const { return grid_; }
  const Eigen::VectorXd& variance() const { return var_; }
  DiskSample sample(std::mt19937_64& rng) const;
  Eigen::MatrixXd sample_batch(int count, std::mt19937_64& rng) const;  // one column per draw

 private:
  DiskGrid grid_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd var_;
};

DiskSample sample_disk_gff(const DiskGrid& g, std::mt19937_64& rng);

// sum over cells of w_cell(p) exp(gamma (X + H) - gamma^2/2 (Var X + Var H)),
// w_cell(p) = int_cell |x|^{-p}. Empty harmonic vectors mean zero; an empty
// mask means every cell.
double gmc_integral(const DiskGrid& g, const Eigen::Ref<const Eigen::VectorXd>& X, const Eigen::VectorXd& var_x,
                    const std::vector<double>& harmonic, const std::vector<double>& var_harmonic,
                    const std::vector<char>& mask, double gamma, double p);

// Var P phi(z) for phi with modes 1..N: sum_{n<=N} |z|^{2n} / n; N < 0 means
// all modes, -log(1 - |z|^2).
double harmonic_variance(cplx z, int N);

// ---- Monte Carlo ----

struct Estimate {
  double mean = 0, se = 0;
  long n = 0;
};

struct McOptions {
  long n_samples = 10000;
  int workers = 1;
  int block = 1024;
  bool antithetic = true;
};

// Mean/SE over n i.i.d. values produced blockwise. fn(block, count, rng)
// returns `count` values; blocks are reduced in order, so the result does
// not depend on the worker count.
Estimate mc_blocks(const RngStreams& rs, const std::string& stream, long n, int block, int workers,
                   const std::function<std::vector<double>(std::uint64_t, int, std::mt19937_64&)>& fn);

using Observable = std::function<double(double c, const CircleField& phi)>;

struct PtOptions {
  McOptions mc{};
  int N = 4;           // mode cutoff of the process
  int n_r = 4;         // annulus rings when mu > 0
  int k_max = 256;
  ProcessOptions process{};
};

// |f_t'(0)|^{Q^2/2} E[F(c + B_t, phi_t) exp(-mu e^{gamma c} M_t)], M_t the
// chaos mass of D \ f_t(D) with weight |x|^{-gamma Q}.
Estimate estimate_Pt(const Observable& F, const VectorField& v, double t, double mu, double gamma, double c,
                     const CircleField& phi, const RngStreams& rs, const PtOptions& opt = {});

// Joint Gaussian of the trace fluctuation modes and the annulus cell values.
class JointSampler {
 public:
  JointSampler(const VectorField& v, double t, int N, double Q, int n_r, int k_max, const ProcessOptions& opt = {});
  const ProcessSampler& process() const { return proc_; }
  const DiskGrid& grid() const { return grid_; }
  const std::vector<char>& annulus() const { return mask_; }
  int dim() const { return L_.rows(); }
  // First 2N+1 entries: trace coordinates; then cell values.
  Eigen::VectorXd draw(const Eigen::VectorXd& z) const { return L_ * z; }
  const Eigen::VectorXd& cell_variance() const { return cell_var_; }

 private:
  ProcessSampler proc_;
  DiskGrid grid_;
  std::vector<char> mask_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd cell_var_;
};

// Law of X_h - Q log|v| on the circle, modes 1..N.
class InvariantSampler {
 public:
  InvariantSampler(const VectorField& v, int N, double Q, int M = 512);
  CircleField draw(const Eigen::VectorXd& z) const;
  CircleField sample(std::mt19937_64& rng) const;
  int dim() const { return 2 * N_; }
  const Eigen::MatrixXcd& mode_covariance() const { return C_; }  // gram / 2 pi, modes -N..-1,1..N
  const std::vector<cplx>& shift() const { return shift_; }

 private:
  int N_;
  Eigen::MatrixXcd C_;
  Eigen::MatrixXd L_;
  std::vector<cplx> shift_;
};

CircleField sample_invariant(const VectorField& v, double Q, int N, std::mt19937_64& rng);

struct PsiOptions {
  McOptions mc{};
  int n_r = 12;
  int N_phi = -1;  // modes in the harmonic-part variance; -1 = all
};

struct PsiEstimate {
  Estimate psi;     // Psi_alpha(c, phi)
  Estimate scaled;  // e^{(Q - alpha) c} Psi_alpha(c, phi)
};

// e^{(alpha - Q)c} E_phi[exp(-mu e^{gamma c} int_D |x|^{-gamma alpha} e^{gamma X} dx)]
PsiEstimate psi_alpha_estimate(double c, const CircleField& phi, double alpha, double gamma, double mu,
                               const RngStreams& rs, const PsiOptions& opt = {});

struct GmcMeanResult {
  Estimate estimate;
  int n_r = 0;
  std::vector<std::pair<int, Estimate>> history;
  double exact = 0;  // 2 pi / (2 - gamma alpha)
};

// E over phi and X_D of the disk chaos mass with weight |x|^{-gamma alpha};
// the grid is refined (n_r doubled) until the estimate moves by < 1 SE.
GmcMeanResult gmc_mean_mass(double gamma, double alpha, long n_samples, int N_phi, const RngStreams& rs,
                            int n_r_start = 10, int n_r_max = 20, int workers = 1);

}  // namespace lcft
