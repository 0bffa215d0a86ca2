#include "itemlab/hmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "itemlab/errors.hpp"
#include "itemlab/rng.hpp"

namespace itemlab {

namespace {

using Vec = std::vector<double>;

constexpr double kDivergenceThreshold = 1000.0;  // energy error marking a divergence

struct DualAveraging {
  double mu = 0.0;
  double log_eps = 0.0;
  double log_eps_bar = 0.0;
  double h_bar = 0.0;
  int count = 1;
  // Hoffman & Gelman defaults.
  double delta = 0.8;
  double gamma = 0.05;
  double t0 = 10.0;
  double kappa = 0.75;

  void restart(double eps) {
    mu = std::log(10.0 * eps);
    log_eps = std::log(eps);
    log_eps_bar = std::log(eps);
    h_bar = 0.0;
    count = 1;
  }

  double update(double accept_stat) {
    const double m = static_cast<double>(count++);
    h_bar = (1.0 - 1.0 / (m + t0)) * h_bar + (delta - accept_stat) / (m + t0);
    log_eps = mu - std::sqrt(m) / gamma * h_bar;
    const double eta = std::pow(m, -kappa);
    log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar;
    return std::exp(log_eps);
  }

  double adapted() const { return std::exp(log_eps_bar); }
};

// Streaming mean/variance for the metric windows.
struct Welford {
  std::size_t n = 0;
  Vec mean, m2;

  explicit Welford(std::size_t dim) : mean(dim, 0.0), m2(dim, 0.0) {}

  void add(const Vec& x) {
    ++n;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / static_cast<double>(n);
      m2[i] += d * (x[i] - mean[i]);
    }
  }

  void reset() {
    n = 0;
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(m2.begin(), m2.end(), 0.0);
  }
};

// Warmup phases: a fast start, doubling variance-estimation windows,
// and a fast tail, as in the usual windowed adaptation schedule.
std::vector<int> metric_window_ends(int warmup) {
  constexpr int kInitBuffer = 75;
  constexpr int kTermBuffer = 50;
  constexpr int kBaseWindow = 25;
  std::vector<int> ends;
  if (warmup < kInitBuffer + kTermBuffer + kBaseWindow) return ends;
  int start = kInitBuffer;
  int size = kBaseWindow;
  const int last = warmup - kTermBuffer;
  while (true) {
    int end = start + size;
    if (end + 2 * size > last) end = last;  // absorb the remainder
    ends.push_back(end);
    if (end >= last) break;
    start = end;
    size *= 2;
  }
  return ends;
}

struct ChainResult {
  Vec draws;  // retained constrained rows
  double step_size = 0.0;
  double mean_accept = 0.0;
  int divergences = 0;
  int max_depth_hits = 0;
};

class ChainRunner {
 public:
  ChainRunner(const Irt2plModel& model, const SamplerConfig& config, std::uint64_t seed)
      : model_(model),
        config_(config),
        rng_(seed),
        dim_(model.dim()),
        inv_metric_(dim_, 1.0),
        q_(dim_),
        grad_(dim_) {}

  ChainResult run() {
    initialize();
    double eps = find_initial_step_size();
    DualAveraging da;
    da.delta = config_.target_accept;
    da.restart(eps);

    const std::vector<int> window_ends = metric_window_ends(config_.warmup);
    std::size_t window_idx = 0;
    Welford welford(dim_);
    const int first_slow = window_ends.empty() ? config_.iterations + 1 : 75;

    ChainResult result;
    const int retained = config_.retained_per_chain();
    result.draws.reserve(static_cast<std::size_t>(retained) * (dim_));
    double accept_sum = 0.0;
    int accept_n = 0;

    for (int it = 1; it <= config_.iterations; ++it) {
      const bool in_warmup = it <= config_.warmup;
      const Transition t = config_.fixed_trajectory_steps > 0
                               ? fixed_hmc_transition(eps)
                               : nuts_transition(eps);

      if (in_warmup) {
        eps = da.update(t.accept_stat);
        if (window_idx < window_ends.size() && it > first_slow) welford.add(q_);
        if (window_idx < window_ends.size() && it == window_ends[window_idx]) {
          update_metric(welford);
          welford.reset();
          ++window_idx;
          eps = da.adapted();
          da.restart(eps);
        }
        if (it == config_.warmup) eps = da.adapted();
      } else {
        accept_sum += t.accept_stat;
        ++accept_n;
        if (t.divergent) ++result.divergences;
        if (t.max_depth) ++result.max_depth_hits;
        const int post = it - config_.warmup;
        if (post % config_.thin == 0) append_constrained(result.draws);
      }
    }

    result.step_size = eps;
    result.mean_accept = accept_n > 0 ? accept_sum / accept_n : 0.0;
    return result;
  }

 private:
  struct Transition {
    double accept_stat = 0.0;
    bool divergent = false;
    bool max_depth = false;
  };

  // Endpoint of a trajectory: position, momentum, cached gradient.
  struct Point {
    Vec q, p, grad;
    double lp = 0.0;
  };

  void initialize() {
    for (int attempt = 0; attempt <= config_.max_init_retries; ++attempt) {
      for (double& v : q_) v = rng_.uniform(-config_.init_radius, config_.init_radius);
      lp_ = eval(q_, grad_);
      if (std::isfinite(lp_)) return;
    }
    throw Error("bad_init", "log density non-finite after " +
                                std::to_string(config_.max_init_retries) + " initialization retries");
  }

  // -inf marks out-of-support points so the trajectory treats them as
  // divergent rather than aborting the chain.
  double eval(const Vec& q, Vec& grad) const {
    for (double v : q)
      if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
    const double lp = model_.log_posterior(q, grad);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return lp;
  }

  double kinetic(const Vec& p) const {
    double k = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) k += inv_metric_[i] * p[i] * p[i];
    return 0.5 * k;
  }

  void draw_momentum(Vec& p) {
    for (std::size_t i = 0; i < dim_; ++i) p[i] = rng_.normal() / std::sqrt(inv_metric_[i]);
  }

  // One leapfrog step of size `eps` in place; returns the new log density.
  double leapfrog(Vec& q, Vec& p, Vec& grad, double eps) const {
    for (std::size_t i = 0; i < dim_; ++i) p[i] += 0.5 * eps * grad[i];
    for (std::size_t i = 0; i < dim_; ++i) q[i] += eps * inv_metric_[i] * p[i];
    const double new_lp = eval(q, grad);
    if (std::isfinite(new_lp))
      for (std::size_t i = 0; i < dim_; ++i) p[i] += 0.5 * eps * grad[i];
    return new_lp;
  }

  double find_initial_step_size() {
    double eps = 1.0;
    Vec p(dim_);
    draw_momentum(p);
    const double h0 = -lp_ + kinetic(p);
    auto probe = [&](double step) {
      Vec q = q_, pp = p, grad = grad_;
      const double lp = leapfrog(q, pp, grad, step);
      if (!std::isfinite(lp)) return 0.0;
      const double h = -lp + kinetic(pp);
      return std::exp(h0 - h);
    };
    double a = probe(eps);
    const double dir = a > 0.5 ? 1.0 : -1.0;
    for (int i = 0; i < 100; ++i) {
      if (dir > 0 && a <= 0.5) break;
      if (dir < 0 && a >= 0.5) break;
      eps *= dir > 0 ? 2.0 : 0.5;
      if (eps > 1e7 || eps < 1e-10) break;
      a = probe(eps);
    }
    return eps;
  }

  void update_metric(const Welford& w) {
    if (w.n < 5) return;
    const double n = static_cast<double>(w.n);
    for (std::size_t i = 0; i < dim_; ++i) {
      const double var = w.m2[i] / (n - 1.0);
      inv_metric_[i] = n / (n + 5.0) * var + 5.0 / (n + 5.0) * 1e-3;
      if (inv_metric_[i] <= 0.0) inv_metric_[i] = 1e-3;
    }
  }

  void append_constrained(Vec& out) const {
    const auto c = model_.constrain(q_);
    out.insert(out.end(), c.theta.begin(), c.theta.end());
    out.insert(out.end(), c.e.begin(), c.e.end());
    out.insert(out.end(), c.a.begin(), c.a.end());
    out.push_back(c.beta_e);
    out.push_back(c.beta_a);
    out.push_back(c.tau_e);
    out.push_back(c.tau_a);
    out.push_back(c.rho);
  }

  Transition fixed_hmc_transition(double eps) {
    Vec q = q_, grad = grad_, p(dim_);
    draw_momentum(p);
    const double h0 = -lp_ + kinetic(p);
    double lp = lp_;
    bool bad = false;
    for (int s = 0; s < config_.fixed_trajectory_steps; ++s) {
      lp = leapfrog(q, p, grad, eps);
      if (!std::isfinite(lp)) {
        bad = true;
        break;
      }
    }
    Transition t;
    const double h = bad ? std::numeric_limits<double>::infinity() : -lp + kinetic(p);
    const double accept = std::isfinite(h) ? std::min(1.0, std::exp(h0 - h)) : 0.0;
    t.accept_stat = accept;
    t.divergent = !std::isfinite(h) || (h - h0) > kDivergenceThreshold;
    if (!t.divergent && rng_.u01() < accept) {
      q_ = std::move(q);
      grad_ = std::move(grad);
      lp_ = lp;
    }
    return t;
  }

  // --- No-U-turn transition (multinomial weighting over the trajectory).

  struct Subtree {
    Point minus, plus;   // trajectory-time ordered ends
    Vec q_prop, grad_prop;
    double lp_prop = 0.0;
    double log_sum_w = -std::numeric_limits<double>::infinity();
    double sum_accept = 0.0;
    int n_leapfrog = 0;
    bool divergent = false;
    bool turning = false;
  };

  static double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  // Progress criterion between the trajectory ends: continue while the
  // span keeps growing along both end momenta.
  bool no_u_turn(const Point& minus, const Point& plus) const {
    double dot_minus = 0.0, dot_plus = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double dq = plus.q[i] - minus.q[i];
      dot_minus += dq * inv_metric_[i] * minus.p[i];
      dot_plus += dq * inv_metric_[i] * plus.p[i];
    }
    return dot_minus >= 0.0 && dot_plus >= 0.0;
  }

  Subtree build_leaf(const Point& from, double direction, double eps, double h0) {
    Subtree t;
    Point leaf = from;
    const double lp = leapfrog(leaf.q, leaf.p, leaf.grad, direction * eps);
    leaf.lp = lp;
    t.n_leapfrog = 1;
    const double h = std::isfinite(lp) ? -lp + kinetic(leaf.p)
                                       : std::numeric_limits<double>::infinity();
    const double dh = h0 - h;  // log weight of this leaf
    t.divergent = !std::isfinite(h) || (h - h0) > kDivergenceThreshold;
    t.sum_accept = std::isfinite(dh) ? std::min(1.0, std::exp(dh)) : 0.0;
    if (!t.divergent) {
      t.log_sum_w = dh;
      t.q_prop = leaf.q;
      t.grad_prop = leaf.grad;
      t.lp_prop = lp;
    }
    t.minus = leaf;
    t.plus = std::move(leaf);
    return t;
  }

  Subtree build_tree(int depth, const Point& from, double direction, double eps, double h0) {
    if (depth == 0) return build_leaf(from, direction, eps, h0);

    Subtree first = build_tree(depth - 1, from, direction, eps, h0);
    if (first.divergent || first.turning) return first;

    const Point& grow_from = direction > 0 ? first.plus : first.minus;
    Subtree second = build_tree(depth - 1, grow_from, direction, eps, h0);
    first.n_leapfrog += second.n_leapfrog;
    first.sum_accept += second.sum_accept;
    if (second.divergent || second.turning) {
      first.divergent = second.divergent;
      first.turning = second.turning;
      return first;
    }

    const double total = log_sum_exp(first.log_sum_w, second.log_sum_w);
    if (std::log(rng_.u01()) < second.log_sum_w - total) {
      first.q_prop = std::move(second.q_prop);
      first.grad_prop = std::move(second.grad_prop);
      first.lp_prop = second.lp_prop;
    }
    first.log_sum_w = total;
    if (direction > 0)
      first.plus = std::move(second.plus);
    else
      first.minus = std::move(second.minus);
    first.turning = !no_u_turn(first.minus, first.plus);
    return first;
  }

  Transition nuts_transition(double eps) {
    Point init;
    init.q = q_;
    init.grad = grad_;
    init.lp = lp_;
    init.p.resize(dim_);
    draw_momentum(init.p);
    const double h0 = -lp_ + kinetic(init.p);

    Point minus = init, plus = init;
    Vec q_prop = q_, grad_prop = grad_;
    double lp_prop = lp_;
    double log_sum_w = 0.0;  // weight 1 for the initial state
    double sum_accept = 0.0;
    int n_leapfrog = 0;

    Transition t;
    for (int depth = 0; depth < config_.max_treedepth; ++depth) {
      const double direction = rng_.u01() < 0.5 ? -1.0 : 1.0;
      Subtree sub = build_tree(depth, direction > 0 ? plus : minus, direction, eps, h0);
      sum_accept += sub.sum_accept;
      n_leapfrog += sub.n_leapfrog;
      if (sub.divergent) {
        t.divergent = true;
        break;
      }
      if (sub.turning) break;

      // Biased progressive sampling: favor the fresh subtree.
      if (std::log(rng_.u01()) < sub.log_sum_w - log_sum_w) {
        q_prop = std::move(sub.q_prop);
        grad_prop = std::move(sub.grad_prop);
        lp_prop = sub.lp_prop;
      }
      log_sum_w = log_sum_exp(log_sum_w, sub.log_sum_w);
      if (direction > 0)
        plus = std::move(sub.plus);
      else
        minus = std::move(sub.minus);

      if (depth == config_.max_treedepth - 1) t.max_depth = true;
      if (!no_u_turn(minus, plus)) break;
    }

    t.accept_stat = n_leapfrog > 0 ? sum_accept / n_leapfrog : 0.0;
    q_ = std::move(q_prop);
    grad_ = std::move(grad_prop);
    lp_ = lp_prop;
    return t;
  }

  const Irt2plModel& model_;
  SamplerConfig config_;
  Rng rng_;
  std::size_t dim_;
  Vec inv_metric_;
  Vec q_, grad_;
  double lp_ = 0.0;
};

}  // namespace

SamplerConfig SamplerConfig::paper_scale() {
  SamplerConfig c;
  c.chains = 4;
  c.iterations = 20000;
  c.warmup = 5000;
  c.thin = 5;
  return c;
}

SamplerConfig SamplerConfig::desk_scale() {
  SamplerConfig c;
  c.chains = 4;
  c.iterations = 2000;
  c.warmup = 1000;
  c.thin = 1;
  return c;
}

void SamplerConfig::validate() const {
  if (chains < 2) throw Error("invalid_config", "at least 2 chains are required for diagnostics");
  if (warmup < 0 || iterations <= warmup)
    throw Error("invalid_config", "iterations must exceed warmup");
  if (thin < 1) throw Error("invalid_config", "thin must be >= 1");
  if (retained_per_chain() < 1)
    throw Error("invalid_config", "thinning leaves no retained draws");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw Error("invalid_config", "target_accept must be in (0, 1)");
  if (max_treedepth < 1 || max_treedepth > 16)
    throw Error("invalid_config", "max_treedepth must be in [1, 16]");
}

std::vector<double> PosteriorFit::pooled(std::size_t param) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_chains) * draws_per_chain);
  for (int c = 0; c < n_chains; ++c)
    for (int d = 0; d < draws_per_chain; ++d) out.push_back(draw(c, d, param));
  return out;
}

std::vector<std::vector<double>> PosteriorFit::by_chain(std::size_t param) const {
  std::vector<std::vector<double>> out(n_chains);
  for (int c = 0; c < n_chains; ++c) {
    out[c].reserve(draws_per_chain);
    for (int d = 0; d < draws_per_chain; ++d) out[c].push_back(draw(c, d, param));
  }
  return out;
}

PosteriorFit sample(const Irt2plModel& model, const SamplerConfig& config) {
  config.validate();

  PosteriorFit fit;
  fit.config = config;
  fit.participant_ids = model.participant_ids();
  fit.item_ids = model.item_ids();
  fit.n_chains = config.chains;
  fit.draws_per_chain = config.retained_per_chain();
  fit.n_params = model.n_participants() + 2 * model.n_items() + 5;

  fit.param_names.reserve(fit.n_params);
  for (const auto& id : fit.participant_ids) fit.param_names.push_back("theta[" + id + "]");
  for (const auto& id : fit.item_ids) fit.param_names.push_back("e[" + id + "]");
  for (const auto& id : fit.item_ids) fit.param_names.push_back("a[" + id + "]");
  fit.param_names.insert(fit.param_names.end(), {"beta_e", "beta_a", "tau_e", "tau_a", "rho"});

  for (int c = 0; c < config.chains; ++c) fit.chain_seeds.push_back(chain_seed(config.seed, c));

  std::vector<ChainResult> results(config.chains);
  std::vector<std::string> failures(config.chains);
  int max_parallel = config.threads > 0
                         ? config.threads
                         : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  max_parallel = std::min(max_parallel, config.chains);

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int c = next.fetch_add(1);
      if (c >= config.chains) break;
      try {
        ChainRunner runner(model, config, fit.chain_seeds[c]);
        results[c] = runner.run();
      } catch (const std::exception& ex) {
        failures[c] = ex.what();
      }
    }
  };
  if (max_parallel <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < max_parallel; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (int c = 0; c < config.chains; ++c)
    if (!failures[c].empty())
      throw Error("chain_failed", "chain " + std::to_string(c) + ": " + failures[c]);

  fit.draws.reserve(static_cast<std::size_t>(config.chains) * fit.draws_per_chain * fit.n_params);
  int total_divergences = 0;
  for (int c = 0; c < config.chains; ++c) {
    const ChainResult& r = results[c];
    fit.draws.insert(fit.draws.end(), r.draws.begin(), r.draws.end());
    fit.step_size.push_back(r.step_size);
    fit.mean_accept.push_back(r.mean_accept);
    fit.divergences.push_back(r.divergences);
    fit.max_depth_hits.push_back(r.max_depth_hits);
    total_divergences += r.divergences;
  }
  const double total_transitions =
      static_cast<double>(config.chains) * (config.iterations - config.warmup);
  fit.reliable =
      static_cast<double>(total_divergences) <= config.divergence_limit * total_transitions;
  return fit;
}

}  // namespace itemlab
