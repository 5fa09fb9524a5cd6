#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qkrylov/exact.hpp"
#include "qkrylov/filters.hpp"
#include "qkrylov/gevp.hpp"
#include "qkrylov/krylov.hpp"
#include "qkrylov/noise.hpp"
#include "qkrylov/pauli.hpp"
#include "qkrylov/references.hpp"

namespace qkrylov {

/// A Hamiltonian with its exact spectrum. Krylov spaces keep references
/// into it, so it stays in place once built.
class System {
 public:
  System(std::string id, PauliSum h, std::size_t dense_cap = kDefaultDenseCap)
      : id_(std::move(id)),
        h_(std::move(h)),
        spectrum_(diagonalize(h_, dense_cap)),
        ground_(ground_state(spectrum_)),
        norm_(spectral_norm(spectrum_)) {
    if (!(norm_ > 0.0)) throw InvalidInput("system '" + id_ + "': Hamiltonian is zero");
  }

  System(const System&) = delete;
  System& operator=(const System&) = delete;
  System(System&&) = delete;
  System& operator=(System&&) = delete;

  const std::string& id() const { return id_; }
  const PauliSum& hamiltonian() const { return h_; }
  const SpectralDecomposition& spectrum() const { return spectrum_; }
  const GroundState& ground() const { return ground_; }
  double exact_energy() const { return ground_.energy; }
  double norm() const { return norm_; }
  std::size_t n_qubits() const { return h_.n_qubits(); }
  HamiltonianData data() const { return {h_, spectrum_}; }

 private:
  std::string id_;
  PauliSum h_;
  SpectralDecomposition spectrum_;
  GroundState ground_;
  double norm_;
};

/// Normalization entering the lit_a threshold: ||H|| for QKS-U and the
/// square root of the Pauli 1-norm for QKS-H.
inline double threshold_normalization(Variant v, const System& sys) {
  return v == Variant::qks_u ? sys.norm() : std::sqrt(one_norm(sys.hamiltonian()));
}

/// Regularization plus filter handling; the label doubles as reg_method in
/// output records ("lit_b", "none+filter", ...).
struct Strategy {
  RegularizationSpec reg;
  FilterMode filter = FilterMode::metric_only;

  std::string label() const {
    std::string s = qkrylov::label(reg);
    if (filter == FilterMode::filtering) s += "+filter";
    return s;
  }
};

inline Strategy parse_strategy(std::string_view text, FilterMode fallback = FilterMode::metric_only) {
  constexpr std::string_view suffix = "+filter";
  if (text.ends_with(suffix)) {
    return {parse_regularization(text.substr(0, text.size() - suffix.size())), FilterMode::filtering};
  }
  return {parse_regularization(text), fallback};
}

struct ExperimentRecord {
  std::string system;
  std::string variant;
  std::size_t B = 1;
  std::size_t K = 0;
  double t = 0.0;
  double tau = 0.0;
  std::string reg_method;
  double threshold = 0.0;
  std::optional<std::uint64_t> seed;  // nullopt for exact runs
  double kappa_pre = 0.0;
  std::optional<double> kappa_post;  // absent when everything was truncated
  std::optional<double> gs_energy;
  std::optional<double> abs_error;
  std::optional<double> deviation;
  bool eliminated = false;
  std::size_t distinct_circuits = 0;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

/// Detailed result of one GEVP solve, kept for diagnostics.
struct Evaluation {
  ExperimentRecord record;
  GevpSolution solution;
  std::vector<FilterVerdict> verdicts;
};

inline std::vector<FilterVerdict> apply_filter(const KrylovConfig& cfg, const Eigen::VectorXcd& lams,
                                               double h_norm) {
  const std::span<const cplx> values(lams.data(), static_cast<std::size_t>(lams.size()));
  if (cfg.variant == Variant::qks_u) return unitary_filter(values, cfg.tau, energy_scale(cfg, h_norm));
  return imaginary_filter(values);
}

/// Solves one (S, T) pair with a strategy and extracts the ground energy.
inline Evaluation evaluate(const KrylovMatrices& m, const System& sys, const Strategy& strategy,
                           double noise_level, std::optional<std::uint64_t> seed) {
  const auto& cfg = m.config;
  RegularizationSpec spec = strategy.reg;
  spec.noise_level = noise_level;
  spec.n_f = threshold_normalization(cfg.variant, sys);

  Evaluation ev;
  ev.solution = solve_gevp(m.S, m.T, spec);
  auto& r = ev.record;
  r.system = sys.id();
  r.variant = to_string(cfg.variant);
  r.B = cfg.B;
  r.K = cfg.K;
  r.t = cfg.t;
  r.tau = cfg.tau;
  r.reg_method = strategy.label();
  r.threshold = ev.solution.threshold_used;
  r.seed = seed;
  r.kappa_pre = ev.solution.condition_number;
  if (!ev.solution.eliminated()) r.kappa_post = ev.solution.condition_number_post;
  r.distinct_circuits = m.distinct_circuits;
  if (ev.solution.eliminated()) {
    r.eliminated = true;
    return ev;
  }
  ev.verdicts = apply_filter(cfg, ev.solution.eigenvalues, sys.norm());
  const auto est = ground_energy(ev.verdicts, strategy.filter == FilterMode::filtering);
  if (!est) {
    r.eliminated = true;
    if (strategy.filter != FilterMode::off) {
      r.deviation = ground_energy(ev.verdicts, false)->verdict.deviation;
    }
    return ev;
  }
  r.gs_energy = est->energy;
  r.abs_error = std::abs(est->energy - sys.exact_energy());
  if (strategy.filter != FilterMode::off) r.deviation = est->verdict.deviation;
  return ev;
}

// ---------------------------------------------------------------------------

/// Overrides on top of the variant defaults.
struct SweepOptions {
  std::optional<double> t;
  std::optional<double> tau;
  bool grouping = true;
  Generator generator = Generator::time_evolution;
};

inline KrylovConfig make_config(Variant v, const System& sys, std::size_t B,
                                const SweepOptions& opts) {
  KrylovConfig cfg = default_config(v, sys.norm(), 0, B);
  if (opts.t) cfg.t = *opts.t;
  if (opts.tau) {
    cfg.tau = *opts.tau;
  } else if (opts.t) {
    cfg.tau = *opts.t;
  }
  cfg.generator = opts.generator;
  cfg.validate();
  return cfg;
}

inline std::vector<ReferenceState> references_for(const System& sys, std::size_t B, bool grouping) {
  auto refs = select_references(sys.ground().state, sys.n_qubits(), B, grouping);
  if (refs.size() < B) {
    throw InvalidInput("only " + std::to_string(refs.size()) +
                       " reference states overlap the ground state; block size " +
                       std::to_string(B) + " requested");
  }
  return refs;
}

/// One record per (B, K, strategy) cell of the noiseless grid.
inline std::vector<ExperimentRecord> sweep_subspace(const System& sys, Variant variant,
                                                    std::span<const std::size_t> B_list,
                                                    std::span<const std::size_t> K_list,
                                                    std::span<const Strategy> strategies,
                                                    const SweepOptions& opts = {}) {
  std::vector<ExperimentRecord> out;
  if (K_list.empty()) return out;
  const std::size_t k_max = *std::max_element(K_list.begin(), K_list.end());
  for (std::size_t B : B_list) {
    const KrylovConfig cfg = make_config(variant, sys, B, opts);
    KrylovSpace space(references_for(sys, B, opts.grouping), sys.data(), cfg);
    space.grow_to(k_max);
    for (std::size_t K : K_list) {
      const auto m = space.matrices(K);
      for (const auto& s : strategies) out.push_back(evaluate(m, sys, s, 0.0, std::nullopt).record);
    }
  }
  return out;
}

/// Per-iteration records for each generation time step, single reference.
inline std::vector<ExperimentRecord> sweep_timestep(const System& sys, Variant variant,
                                                    std::span<const double> t_list,
                                                    std::span<const Strategy> strategies,
                                                    std::size_t K_max, SweepOptions opts = {}) {
  std::vector<ExperimentRecord> out;
  for (double t : t_list) {
    opts.t = t;
    opts.tau = t;
    const KrylovConfig cfg = make_config(variant, sys, 1, opts);
    KrylovSpace space(references_for(sys, 1, opts.grouping), sys.data(), cfg);
    space.grow_to(K_max);
    for (std::size_t K = 0; K <= K_max; ++K) {
      const auto m = space.matrices(K);
      for (const auto& s : strategies) out.push_back(evaluate(m, sys, s, 0.0, std::nullopt).record);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ensemble statistics

struct EnsembleStats {
  std::size_t n_runs = 0;
  double geo_mean = std::numeric_limits<double>::quiet_NaN();
  double geo_std = std::numeric_limits<double>::quiet_NaN();
};

/// Values below this are floored before taking logarithms.
inline constexpr double kGeometricFloor = 1e-16;

/// Geometric mean and multiplicative standard deviation (sample std of the
/// logs, ddof = 1; 1 for a single value).
inline EnsembleStats geometric_stats(std::span<const double> xs) {
  EnsembleStats s;
  s.n_runs = xs.size();
  if (xs.empty()) return s;
  std::vector<double> logs;
  logs.reserve(xs.size());
  for (double x : xs) {
    if (std::isnan(x)) throw InvalidInput("geometric_stats: NaN value");
    logs.push_back(std::log(std::max(x, kGeometricFloor)));
  }
  double mean = 0.0;
  for (double l : logs) mean += l;
  mean /= static_cast<double>(logs.size());
  double var = 0.0;
  if (logs.size() > 1) {
    for (double l : logs) var += (l - mean) * (l - mean);
    var /= static_cast<double>(logs.size() - 1);
  }
  s.geo_mean = std::exp(mean);
  s.geo_std = std::exp(std::sqrt(var));
  return s;
}

/// Worker count: QKRYLOV_THREADS when set to a positive integer, otherwise
/// the hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("QKRYLOV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(0..n-1) on up to worker_count() threads; the first exception is
/// rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct EnsembleOptions {
  NoiseSpec noise{1'000'000, 0, true, true};  // seed is the base seed
  std::size_t n_runs = 100;
  std::size_t K_max = 10;
  std::size_t B = 1;
  SweepOptions sweep;
};

struct EnsembleRow {
  std::string strategy;
  std::size_t K = 0;
  std::string quantity;  // abs_error, deviation, kappa_pre, kappa_post
  EnsembleStats stats;
};

struct EnsembleResult {
  std::vector<ExperimentRecord> records;  // run-major, then K, then strategy
  std::vector<EnsembleRow> stats;         // strategy-major, then K, then quantity
};

/// Noisy runs with seeds base + r over a fixed exact basis. Eliminated runs
/// drop out of the error statistics for that cell.
inline EnsembleResult run_noisy_ensemble(const System& sys, Variant variant,
                                         std::span<const Strategy> strategies,
                                         const EnsembleOptions& opts) {
  if (opts.n_runs < 2) throw InvalidInput("run_noisy_ensemble: n_runs must be >= 2");
  if (!opts.noise.enabled) throw InvalidInput("run_noisy_ensemble: noise must be enabled");
  const KrylovConfig cfg = make_config(variant, sys, opts.B, opts.sweep);
  KrylovSpace space(references_for(sys, opts.B, opts.sweep.grouping), sys.data(), cfg);
  space.grow_to(opts.K_max);

  const std::size_t per_run = (opts.K_max + 1) * strategies.size();
  std::vector<ExperimentRecord> records(opts.n_runs * per_run);
  parallel_for(opts.n_runs, [&](std::size_t r) {
    NoiseSpec spec = opts.noise;
    spec.seed = opts.noise.seed + r;
    const auto full = sample_noisy(space, spec, opts.K_max);
    std::size_t slot = r * per_run;
    for (std::size_t K = 0; K <= opts.K_max; ++K) {
      const auto m = full.leading(K);
      for (const auto& s : strategies) {
        records[slot++] = evaluate(m, sys, s, spec.noise_level(), spec.seed).record;
      }
    }
  });

  EnsembleResult result;
  for (std::size_t si = 0; si < strategies.size(); ++si) {
    for (std::size_t K = 0; K <= opts.K_max; ++K) {
      std::vector<double> err, dev, kpre, kpost;
      for (std::size_t r = 0; r < opts.n_runs; ++r) {
        const auto& rec = records[r * per_run + K * strategies.size() + si];
        if (rec.abs_error) err.push_back(*rec.abs_error);
        if (rec.deviation) dev.push_back(*rec.deviation);
        kpre.push_back(rec.kappa_pre);
        if (rec.kappa_post) kpost.push_back(*rec.kappa_post);
      }
      const std::string label = strategies[si].label();
      result.stats.push_back({label, K, "abs_error", geometric_stats(err)});
      result.stats.push_back({label, K, "deviation", geometric_stats(dev)});
      result.stats.push_back({label, K, "kappa_pre", geometric_stats(kpre)});
      result.stats.push_back({label, K, "kappa_post", geometric_stats(kpost)});
    }
  }
  result.records = std::move(records);
  return result;
}

/// Looks up one ensemble cell; throws when absent.
inline const EnsembleStats& find_stats(const EnsembleResult& res, std::string_view strategy,
                                       std::size_t K, std::string_view quantity) {
  for (const auto& row : res.stats) {
    if (row.strategy == strategy && row.K == K && row.quantity == quantity) return row.stats;
  }
  throw InvalidInput("no ensemble statistics for " + std::string(strategy) + " K=" +
                     std::to_string(K) + " " + std::string(quantity));
}

// ---------------------------------------------------------------------------

struct SingularValueRun {
  std::optional<std::uint64_t> seed;
  std::vector<double> log10_values;  // descending singular values of S
  std::optional<std::size_t> elbow;
};

/// Singular values of S at iteration K: one exact run when noise is off,
/// otherwise n_runs noisy runs with seeds base + r.
inline std::vector<SingularValueRun> dump_singular_values(const System& sys, Variant variant,
                                                          std::size_t K, const NoiseSpec& noise,
                                                          std::size_t n_runs, std::size_t B = 1,
                                                          const SweepOptions& opts = {}) {
  const KrylovConfig cfg = make_config(variant, sys, B, opts);
  KrylovSpace space(references_for(sys, B, opts.grouping), sys.data(), cfg);
  space.grow_to(K);

  auto describe = [](const CMatrix& S, std::optional<std::uint64_t> seed) {
    const auto dec = svd(S);
    SingularValueRun run{seed, {}, std::nullopt};
    std::vector<double> sv(dec.sigma.data(), dec.sigma.data() + dec.sigma.size());
    for (double s : sv) run.log10_values.push_back(std::log10(std::max(s, 1e-300)));
    run.elbow = elbow_index(sv);
    return run;
  };

  if (!noise.enabled) return {describe(space.matrices(K).S, std::nullopt)};
  if (n_runs < 1) throw InvalidInput("dump_singular_values: n_runs must be >= 1");
  std::vector<SingularValueRun> runs(n_runs);
  parallel_for(n_runs, [&](std::size_t r) {
    NoiseSpec spec = noise;
    spec.seed = noise.seed + r;
    runs[r] = describe(sample_noisy(space, spec, K).S, spec.seed);
  });
  return runs;
}

}  // namespace qkrylov
