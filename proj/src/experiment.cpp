#include "wcm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "wcm/bomp.hpp"
#include "wcm/coherence.hpp"
#include "wcm/ds_designer.hpp"
#include "wcm/io.hpp"
#include "wcm/wcm_optimizer.hpp"

namespace wcm {

std::string to_string(DictFamily family) {
  return family == DictFamily::gaussian ? "gaussian" : "dct_rows";
}

std::string to_string(Designer designer) {
  switch (designer) {
    case Designer::random: return "random";
    case Designer::ds: return "ds";
    case Designer::wcm: return "wcm";
  }
  return "?";
}

namespace {

DictFamily parse_family(const std::string& s) {
  if (s == "gaussian") return DictFamily::gaussian;
  if (s == "dct_rows") return DictFamily::dct_rows;
  throw FormatError("unknown dict_family '" + s + "' (expected gaussian or dct_rows)");
}

Designer parse_designer(const std::string& s) {
  if (s == "random") return Designer::random;
  if (s == "ds") return Designer::ds;
  if (s == "wcm") return Designer::wcm;
  throw FormatError("unknown designer '" + s + "' (expected random, ds or wcm)");
}

bool uses(const ExperimentConfig& cfg, Designer d) {
  return std::find(cfg.designers.begin(), cfg.designers.end(), d) != cfg.designers.end();
}

}  // namespace

BlockStructure ExperimentConfig::structure() const {
  if (!block_sizes.empty()) return BlockStructure(block_sizes);
  if (block_size < 1 || K % block_size != 0) {
    throw DomainError("ExperimentConfig: K=" + std::to_string(K) +
                      " is not a multiple of block_size=" + std::to_string(block_size));
  }
  return BlockStructure::uniform(block_size, K / block_size);
}

void ExperimentConfig::validate() const {
  if (!(M >= 1 && M < N && N <= K)) {
    throw DomainError("ExperimentConfig: need 1 <= M < N <= K");
  }
  const auto s = structure();
  if (s.num_atoms() != K) {
    throw DomainError("ExperimentConfig: block sizes sum to " + std::to_string(s.num_atoms()) +
                      ", expected K=" + std::to_string(K));
  }
  if (k < 1 || k > s.num_blocks()) throw DomainError("ExperimentConfig: need 1 <= k <= B");
  // k blocks must fit in M measurements or the least-squares refit is singular.
  std::vector<Index> sizes = s.sizes();
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  const Index widest = std::accumulate(sizes.begin(), sizes.begin() + k, Index{0});
  if (widest > M) {
    throw DomainError("ExperimentConfig: the " + std::to_string(k) + " largest blocks span " +
                      std::to_string(widest) + " atoms, more than M=" + std::to_string(M));
  }
  if (L < 1) throw DomainError("ExperimentConfig: L must be positive");
  if (trials < 1) throw DomainError("ExperimentConfig: trials must be positive");
  if (designers.empty()) throw DomainError("ExperimentConfig: no designers selected");
  if (uses(*this, Designer::wcm)) {
    if (alpha_grid.empty()) throw DomainError("ExperimentConfig: empty alpha_grid");
    for (double a : alpha_grid) detail::check_alpha(a, "ExperimentConfig");
  }
  if (max_iters < 1) throw DomainError("ExperimentConfig: max_iters must be positive");
  if (!(rel_tol > 0)) throw DomainError("ExperimentConfig: rel_tol must be positive");
  if (threads < 0) throw DomainError("ExperimentConfig: threads must be >= 0");
}

void ExperimentConfig::apply_preset(const std::string& name) {
  if (name == "desk") {
    L = 200;
    trials = 20;
  } else if (name == "full") {
    L = 1000;
    trials = 100;
  } else {
    throw DomainError("unknown preset '" + name + "' (expected desk or full)");
  }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("preset")) cfg.apply_preset(j.at("preset").get<std::string>());
    if (j.contains("dict_family")) cfg.dict_family = parse_family(j.at("dict_family").get<std::string>());
    if (j.contains("N")) cfg.N = j.at("N").get<Index>();
    if (j.contains("K")) cfg.K = j.at("K").get<Index>();
    if (j.contains("M")) cfg.M = j.at("M").get<Index>();
    if (j.contains("block_size")) cfg.block_size = j.at("block_size").get<Index>();
    if (j.contains("block_sizes")) cfg.block_sizes = j.at("block_sizes").get<std::vector<Index>>();
    if (j.contains("k")) cfg.k = j.at("k").get<Index>();
    if (j.contains("L")) cfg.L = j.at("L").get<Index>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
    if (j.contains("alpha_grid")) cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("designers")) {
      cfg.designers.clear();
      for (const auto& d : j.at("designers")) cfg.designers.push_back(parse_designer(d.get<std::string>()));
    }
    if (j.contains("max_iters")) cfg.max_iters = j.at("max_iters").get<int>();
    if (j.contains("rel_tol")) cfg.rel_tol = j.at("rel_tol").get<double>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("experiment config: ") + ex.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["dict_family"] = to_string(dict_family);
  j["N"] = N;
  j["K"] = K;
  j["M"] = M;
  j["block_sizes"] = structure().sizes();
  j["k"] = k;
  j["L"] = L;
  j["trials"] = trials;
  j["alpha_grid"] = alpha_grid;
  j["seed"] = seed;
  std::vector<std::string> names;
  for (auto d : designers) names.push_back(to_string(d));
  j["designers"] = names;
  j["max_iters"] = max_iters;
  j["rel_tol"] = rel_tol;
  return j;
}

Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return Rng(seq);
}

Matrix dct_matrix(Index k) {
  const double pi = std::acos(-1.0);
  Matrix c(k, k);
  for (Index r = 0; r < k; ++r) {
    const double scale = std::sqrt((r == 0 ? 1.0 : 2.0) / static_cast<double>(k));
    for (Index n = 0; n < k; ++n) {
      c(r, n) = scale * std::cos(pi * static_cast<double>((2 * n + 1) * r) /
                                 (2.0 * static_cast<double>(k)));
    }
  }
  return c;
}

void normalize_columns(Matrix& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    const double n = m.col(c).norm();
    if (n > 0) m.col(c) /= n;
  }
}

Dict<double> gen_dictionary(const ExperimentConfig& cfg, Rng& rng) {
  Matrix d;
  if (cfg.dict_family == DictFamily::gaussian) {
    d = gaussian_matrix<double>(cfg.N, cfg.K, rng);
  } else {
    const Matrix full = dct_matrix(cfg.K);
    std::vector<Index> rows(static_cast<std::size_t>(cfg.K));
    std::iota(rows.begin(), rows.end(), Index{0});
    // Partial Fisher-Yates: the first N entries are a uniform draw without replacement.
    for (Index i = 0; i < cfg.N; ++i) {
      std::uniform_int_distribution<Index> pick(i, cfg.K - 1);
      std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(pick(rng))]);
    }
    d.resize(cfg.N, cfg.K);
    for (Index i = 0; i < cfg.N; ++i) d.row(i) = full.row(rows[static_cast<std::size_t>(i)]);
  }
  normalize_columns(d);
  return Dict<double>(std::move(d), cfg.structure());
}

SignalSet gen_signals(const Dict<double>& d, Index k, Index L, Rng& rng) {
  const auto& s = d.structure();
  if (k < 1 || k > s.num_blocks()) throw DomainError("gen_signals: need 1 <= k <= B");
  if (L < 1) throw DomainError("gen_signals: L must be positive");
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<Index> blocks(static_cast<std::size_t>(s.num_blocks()));
  SignalSet out;
  out.Theta = Matrix::Zero(s.num_atoms(), L);
  for (Index l = 0; l < L; ++l) {
    std::iota(blocks.begin(), blocks.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> pick(i, s.num_blocks() - 1);
      std::swap(blocks[static_cast<std::size_t>(i)], blocks[static_cast<std::size_t>(pick(rng))]);
      const Index j = blocks[static_cast<std::size_t>(i)];
      for (Index m = 0; m < s.size(j); ++m) {
        double v = 0;
        while (v == 0) v = coef(rng);
        out.Theta(s.offset(j) + m, l) = v;
      }
    }
  }
  out.X = d.matrix() * out.Theta;
  return out;
}

double classification_rate(const Matrix& theta_hat, const Matrix& theta) {
  if (theta_hat.rows() != theta.rows() || theta_hat.cols() != theta.cols()) {
    throw DimensionError("classification_rate: shape mismatch");
  }
  const auto truth = (theta.array() != 0);
  const Index total = truth.count();
  if (total == 0) throw DomainError("classification_rate: Theta has no nonzero entries");
  const Index hits = (truth && (theta_hat.array() != 0)).count();
  return static_cast<double>(hits) / static_cast<double>(total);
}

double representation_error(const Matrix& x, const Matrix& d, const Matrix& theta_hat) {
  if (d.rows() != x.rows() || d.cols() != theta_hat.rows() || x.cols() != theta_hat.cols()) {
    throw DimensionError("representation_error: shape mismatch");
  }
  const double denom = x.norm();
  if (denom == 0) throw DomainError("representation_error: X is zero");
  return (x - d * theta_hat).norm() / denom;
}

DesignEvaluation evaluate_design(const Dict<double>& d, const SignalSet& signals,
                                 const Matrix& a, Index k, double alpha) {
  const auto e = equivalent_dictionary(a, d.matrix(), d.structure());
  const Matrix y = a * signals.X;
  BompConfig bomp;
  bomp.k_blocks = k;
  DesignEvaluation out;
  out.theta_hat = bomp_decode_all(e, y, bomp);
  out.e = representation_error(signals.X, d.matrix(), out.theta_hat);
  out.r = classification_rate(out.theta_hat, signals.Theta);
  const auto g = gram(e);
  out.ratio = total_sub(g) / total_inter(g);
  out.objective = objective(g, alpha);
  return out;
}

std::vector<TrialResult> run_trial(const ExperimentConfig& cfg, int trial) {
  Rng rng = trial_rng(cfg.seed, static_cast<std::uint64_t>(trial));
  const Dict<double> d = gen_dictionary(cfg, rng);
  const SignalSet signals = gen_signals(d, cfg.k, cfg.L, rng);

  std::vector<TrialResult> rows;
  auto push = [&](Designer designer, std::optional<double> alpha, const Matrix& a) {
    // Non-WCM designs report f at alpha = 1/2, i.e. half of |E'E - I|_F^2.
    const auto ev = evaluate_design(d, signals, a, cfg.k, alpha.value_or(0.5));
    rows.push_back(TrialResult{trial, designer, alpha, ev.e, ev.r, ev.ratio, ev.objective});
  };

  if (uses(cfg, Designer::random)) {
    push(Designer::random, std::nullopt, gaussian_matrix<double>(cfg.M, cfg.N, rng));
  }
  if (uses(cfg, Designer::ds) || uses(cfg, Designer::wcm)) {
    const auto ds = design_ds(d, cfg.M);
    if (uses(cfg, Designer::ds)) push(Designer::ds, std::nullopt, ds.matrix());
    if (uses(cfg, Designer::wcm)) {
      for (double alpha : cfg.alpha_grid) {
        WcmConfig<double> wcfg;
        wcfg.alpha = alpha;
        wcfg.max_iters = cfg.max_iters;
        wcfg.rel_tol = cfg.rel_tol;
        const auto report = run_wcm(d, ds, wcfg);
        push(Designer::wcm, alpha, report.sensing.matrix());
      }
    }
  }
  return rows;
}

void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<TrialResult>> per_trial(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, cfg.threads,
               [&](int t) { per_trial[static_cast<std::size_t>(t)] = run_trial(cfg, t); });
  SweepResult out;
  for (auto& rows : per_trial) {
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  out.summary = summarize(out.rows);
  return out;
}

namespace {

struct Accumulator {
  std::vector<double> e, r, ratio, objective;
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1))};
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& rows) {
  using Key = std::pair<Designer, std::optional<double>>;
  std::vector<Key> order;
  std::map<Key, Accumulator> groups;
  for (const auto& row : rows) {
    const Key key{row.designer, row.alpha};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.e.push_back(row.e);
    it->second.r.push_back(row.r);
    it->second.ratio.push_back(row.ratio);
    it->second.objective.push_back(row.objective);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& acc = groups.at(key);
    SummaryRow s;
    s.designer = key.first;
    s.alpha = key.second;
    s.n = static_cast<int>(acc.e.size());
    std::tie(s.e_mean, s.e_std) = mean_std(acc.e);
    std::tie(s.r_mean, s.r_std) = mean_std(acc.r);
    std::tie(s.ratio_mean, s.ratio_std) = mean_std(acc.ratio);
    std::tie(s.objective_mean, s.objective_std) = mean_std(acc.objective);
    out.push_back(s);
  }
  return out;
}

namespace {

std::string alpha_cell(const std::optional<double>& alpha) {
  return alpha ? format_double(*alpha) : std::string();
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<TrialResult>& rows) {
  out << "trial,designer,alpha,e,r,ratio_nu_mu,objective\n";
  for (const auto& row : rows) {
    out << row.trial << ',' << to_string(row.designer) << ',' << alpha_cell(row.alpha) << ','
        << format_double(row.e) << ',' << format_double(row.r) << ','
        << format_double(row.ratio) << ',' << format_double(row.objective) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "designer,alpha,n,e_mean,e_std,r_mean,r_std,ratio_nu_mu_mean,ratio_nu_mu_std,"
         "objective_mean,objective_std\n";
  for (const auto& s : rows) {
    out << to_string(s.designer) << ',' << alpha_cell(s.alpha) << ',' << s.n << ','
        << format_double(s.e_mean) << ',' << format_double(s.e_std) << ','
        << format_double(s.r_mean) << ',' << format_double(s.r_std) << ','
        << format_double(s.ratio_mean) << ',' << format_double(s.ratio_std) << ','
        << format_double(s.objective_mean) << ',' << format_double(s.objective_std) << '\n';
  }
}

std::vector<double> run_histogram(const Dict<double>& d, Index m, double alpha, int replicates,
                                  Rng& rng, int max_iters, double rel_tol, int threads) {
  if (replicates < 1) throw DomainError("run_histogram: replicates must be positive");
  WcmConfig<double> base;
  base.alpha = alpha;
  base.max_iters = max_iters;
  base.rel_tol = rel_tol;
  base.init = WcmInit::random;
  base.validate();
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(replicates));
  for (auto& s : seeds) s = rng();
  std::vector<double> out(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](int i) {
    WcmConfig<double> cfg = base;
    cfg.seed = seeds[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = run_wcm(d, m, cfg).final_objective();
  });
  return out;
}

}  // namespace wcm
