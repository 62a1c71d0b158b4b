#ifndef WCM_EXPERIMENT_HPP
#define WCM_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "wcm/block_model.hpp"

namespace wcm {

using Matrix = Mat<double>;
using Rng = std::mt19937_64;

enum class DictFamily { gaussian, dct_rows };
enum class Designer { random, ds, wcm };

std::string to_string(DictFamily family);
std::string to_string(Designer designer);

/// Parameters of a recovery/classification sweep. Defaults follow the
/// full-scale protocol (s=3, N=60, K=120, k=2, M=14, L=1000, 100 trials).
struct ExperimentConfig {
  DictFamily dict_family = DictFamily::gaussian;
  Index N = 60;
  Index K = 120;
  Index M = 14;
  Index block_size = 3;            // used when block_sizes is empty
  std::vector<Index> block_sizes;  // explicit, possibly mixed, sizes
  Index k = 2;
  Index L = 1000;
  int trials = 100;
  std::vector<double> alpha_grid{0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
  std::uint64_t seed = 0;
  std::vector<Designer> designers{Designer::random, Designer::ds, Designer::wcm};
  int max_iters = 1000;
  double rel_tol = 1e-8;
  int threads = 0;  // 0: hardware concurrency

  BlockStructure structure() const;
  void validate() const;

  /// Named scale presets; "desk" sets L=200 and trials=20.
  void apply_preset(const std::string& name);

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Per-trial generator derived only from (seed, trial).
Rng trial_rng(std::uint64_t seed, std::uint64_t trial);

/// Orthonormal K x K DCT-II matrix; row r is the r-th cosine basis vector.
Matrix dct_matrix(Index k);

/// Scales every column to unit Euclidean norm.
void normalize_columns(Matrix& m);

/// Gaussian or DCT-row dictionary with unit-norm columns.
Dict<double> gen_dictionary(const ExperimentConfig& cfg, Rng& rng);

struct SignalSet {
  Matrix X;      // N x L signals
  Matrix Theta;  // K x L block-sparse representations, X = D Theta
};

/// L signals, each with exactly k active blocks and i.i.d. U[-1,1] coefficients.
SignalSet gen_signals(const Dict<double>& d, Index k, Index L, Rng& rng);

/// Fraction of truly nonzero entries of Theta that are also nonzero in
/// Theta_hat; equals |Theta_hat .* Theta|_0 / (L k s) for fixed block size s.
double classification_rate(const Matrix& theta_hat, const Matrix& theta);

/// |X - D Theta_hat|_F / |X|_F.
double representation_error(const Matrix& x, const Matrix& d, const Matrix& theta_hat);

/// Outcome of decoding one signal set through one sensing matrix.
struct DesignEvaluation {
  Matrix theta_hat;
  double e = 0;
  double r = 0;
  double ratio = 0;      // total_sub / total_inter of E = AD
  double objective = 0;  // f at the evaluation alpha
};

DesignEvaluation evaluate_design(const Dict<double>& d, const SignalSet& signals,
                                 const Matrix& a, Index k, double alpha);

struct TrialResult {
  int trial = 0;
  Designer designer = Designer::ds;
  std::optional<double> alpha;  // set for WCM rows only
  double e = 0;
  double r = 0;
  double ratio = 0;
  double objective = 0;
};

struct SummaryRow {
  Designer designer = Designer::ds;
  std::optional<double> alpha;
  int n = 0;
  double e_mean = 0, e_std = 0;
  double r_mean = 0, r_std = 0;
  double ratio_mean = 0, ratio_std = 0;
  double objective_mean = 0, objective_std = 0;
};

struct SweepResult {
  std::vector<TrialResult> rows;  // ordered by trial, then designer
  std::vector<SummaryRow> summary;
};

/// Rows of a single trial: random A, DS, then WCM over the alpha grid
/// (each WCM run starts from DS), restricted to cfg.designers.
std::vector<TrialResult> run_trial(const ExperimentConfig& cfg, int trial);

/// All trials on a thread pool, then mean and sample standard deviation per
/// (designer, alpha). Output does not depend on the thread count.
SweepResult run_sweep(const ExperimentConfig& cfg);

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& rows);

void write_results_csv(std::ostream& out, const std::vector<TrialResult>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Final WCM objective of `replicates` runs from i.i.d. Gaussian starting
/// matrices. Replicate seeds are drawn from `rng` up front.
std::vector<double> run_histogram(const Dict<double>& d, Index m, double alpha, int replicates,
                                  Rng& rng, int max_iters = 1000, double rel_tol = 1e-8,
                                  int threads = 0);

/// Runs `count` independent jobs on up to `threads` workers (0: hardware).
/// The first exception thrown by a job is rethrown after all workers stop.
void parallel_for(int count, int threads, const std::function<void(int)>& job);

}  // namespace wcm

#endif  // WCM_EXPERIMENT_HPP
