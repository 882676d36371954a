#include "cdiff/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "cdiff/config.hpp"
#include "cdiff/ctmc.hpp"
#include "cdiff/error.hpp"
#include "cdiff/eval.hpp"
#include "cdiff/losses.hpp"
#include "cdiff/models.hpp"
#include "cdiff/samplers.hpp"
#include "cdiff/tabular_models.hpp"
#include "cdiff/training.hpp"

namespace cdiff {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::vector<State> all_states(const StateSpace& space) {
  std::vector<State> xs;
  for (std::uint64_t i = 0; i < space.state_count(); ++i) xs.push_back(space.state_at(i));
  return xs;
}

std::vector<Rng> chain_rngs(std::size_t n, std::uint64_t seed) {
  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rngs.emplace_back(derive_seed(seed, {i}));
  return rngs;
}

ForwardProcess constant_process(const StateSpace& space, double horizon = 1.0) {
  return ForwardProcess{space, NoiseSchedule::constant(1.0, horizon), RateSpec::uniform(space.vocab())};
}

template <class F>
CheckResult timed(std::string id, std::string name, F&& body) {
  CheckResult r;
  r.id = std::move(id);
  r.name = std::move(name);
  const auto start = Clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

void randomize(Model& model, Rng& rng, double scale) {
  for (auto& v : model.params().values()) v = rng.uniform(-scale, scale);
}

// Oracle logits plus a fixed time-independent perturbation per (x^{\d}, d, c), so
// the perturbed model is still a valid conditional model.
class PerturbedModel : public Model {
 public:
  PerturbedModel(const Model& base, Eigen::MatrixXd noise)
      : Model(base.space(), base.mode(), base.horizon()), base_(base), noise_(std::move(noise)) {}
  ModelKind kind() const override { return base_.kind(); }

  std::unique_ptr<ForwardPass> forward(std::span<const State> xs, std::span<const double> ts) const override {
    struct Pass : ForwardPass {
      explicit Pass(Eigen::MatrixXd l) { logits_ = std::move(l); }
      void backward(const Eigen::MatrixXd&, std::span<double>) const override {}
    };
    Eigen::MatrixXd l = base_.logits(xs, ts);
    const int dims = space().dims();
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (int d = 0; d < dims; ++d) {
        State ctx = xs[i];
        ctx[static_cast<std::size_t>(d)] = 0;
        const auto ci = static_cast<Eigen::Index>(space().index(ctx));
        l.row(static_cast<Eigen::Index>(i) * dims + d) += noise_.row(ci * dims + d);
      }
    return std::make_unique<Pass>(std::move(l));
  }

 private:
  const Model& base_;
  Eigen::MatrixXd noise_;
};

}  // namespace

VerifyLevel parse_verify_level(std::string_view s) {
  if (s == "fast") return VerifyLevel::fast;
  if (s == "full") return VerifyLevel::full;
  throw ConfigError("unknown verify level '" + std::string(s) + "' (expected fast or full)");
}

CheckResult check_loss_equivalence(const VerifyOptions& opt) {
  return timed("loss_equivalence", "original vs simplified cross-entropy: gradients and loss differences",
               [&](CheckResult& r) {
                 const StateSpace space(4, 3);
                 Rng rng(derive_seed(opt.seed, {1}));
                 const auto q = TabularDistribution::random(space, rng);
                 const double t = 0.3;
                 NetworkOptions net;
                 net.hidden = 16;
                 net.layers = 2;
                 net.stream_width = 4;
                 net.precision = Precision::float64;
                 std::vector<std::unique_ptr<Model>> models;
                 models.push_back(make_tabular_logit_model(space, ModelMode::noisy_marginal, 1.0, 1));
                 models.push_back(make_hollow_model(space, ModelMode::noisy_marginal, 1.0, net));
                 double worst = 0.0;
                 for (auto& m : models) {
                   randomize(*m, rng, 0.5);
                   const auto a1 = loss_ce_original_tabular(*m, q, t, true);
                   const auto b1 = loss_ce_simplified_exact(*m, q, t, true);
                   for (std::size_t i = 0; i < a1.grad.size(); ++i)
                     worst = std::max(worst, std::abs(a1.grad[i] - b1.grad[i]));
                   randomize(*m, rng, 0.5);
                   const auto a2 = loss_ce_original_tabular(*m, q, t, false);
                   const auto b2 = loss_ce_simplified_exact(*m, q, t, false);
                   worst = std::max(worst, std::abs((a1.value - a2.value) - (b1.value - b2.value)));
                 }
                 r.value = worst;
                 r.threshold = 1e-8;
                 r.passed = worst <= r.threshold;
                 r.detail = "max |difference| over tabular and hollow models = " + fmt(worst);
               });
}

namespace {

double reverse_tv(const VerifyOptions& opt, const ReverseRateFn& rate, std::size_t paths) {
  const StateSpace space(4, 3);
  Rng rng(derive_seed(opt.seed, {2}));
  const auto pi = TabularDistribution::random(space, rng);
  const auto process = constant_process(space);
  ExactReverseOptions ro;
  ro.rate = rate;
  const auto xs = exact_reverse_simulate(pi, process, paths, derive_seed(opt.seed, {3}), ro);
  return tv_distance(empirical_distribution(xs, space), pi);
}

}  // namespace

CheckResult check_reverse_simulation(const VerifyOptions& opt) {
  return timed("reverse_simulation", "exact reverse simulation from q_T recovers the data law", [&](CheckResult& r) {
    const std::size_t paths = opt.level == VerifyLevel::full ? 100000 : 20000;
    r.value = reverse_tv(opt, {}, paths);
    r.threshold = 0.05;
    r.passed = r.value <= r.threshold;
    r.detail = "TV = " + fmt(r.value) + " with " + std::to_string(paths) + " paths on 81 states";
  });
}

CheckResult check_reverse_negative_control(const VerifyOptions& opt) {
  return timed("reverse_negative_control", "sign-flipped reverse rate is detected by the TV check", [&](CheckResult& r) {
    const ReverseRateFn flipped = [](double q_x, double q_y, double fwd) { return q_x / q_y * fwd; };
    r.value = reverse_tv(opt, flipped, 20000);
    r.threshold = 0.05;
    r.passed = r.value > r.threshold;
    r.detail = "TV with flipped ratio = " + fmt(r.value) + " (must exceed the bound)";
  });
}

CheckResult check_kolmogorov_residual(const VerifyOptions& opt) {
  return timed("kolmogorov_residual", "central-difference Kolmogorov forward residual is O(h^2)", [&](CheckResult& r) {
    const StateSpace space(2, 3);
    Rng rng(derive_seed(opt.seed, {4}));
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j)
        if (i != j) q(i, j) = rng.uniform(0.2, 2.0);
      q(i, i) = -q.row(i).sum();
    }
    const std::vector<ForwardProcess> processes = {
        ForwardProcess{space, NoiseSchedule::constant(1.0), RateSpec::uniform(3)},
        ForwardProcess{space, NoiseSchedule::cosine(), RateSpec::from_matrix(q)},
    };
    const double s = 0.1;
    const double t = 0.5;
    double worst = 0.0;
    std::string detail;
    for (const auto& p : processes) {
      const Eigen::MatrixXd gen = full_generator(space, p.rate);
      const auto residual = [&](double h) {
        const Eigen::MatrixXd fd =
            (full_transition(space, p.kernel(s, t + h)) - full_transition(space, p.kernel(s, t - h))) / (2.0 * h);
        const Eigen::MatrixXd exact = full_transition(space, p.kernel(s, t)) * gen * p.schedule.beta(t);
        return (fd - exact).cwiseAbs().maxCoeff();
      };
      const double ratio = residual(1e-3) / residual(5e-4);
      worst = std::max(worst, std::abs(ratio - 4.0));
      detail += std::string(detail.empty() ? "" : ", ") + std::string(schedule_kind_name(p.schedule.kind())) + " ratio " + fmt(ratio);
    }
    r.value = worst;
    r.threshold = 0.5;
    r.passed = worst <= r.threshold;
    r.detail = "Richardson " + detail;
  });
}

CheckResult check_euler_order(const VerifyOptions& opt) {
  return timed("euler_order", "Euler one-step error is O(eps^2)", [&](CheckResult& r) {
    const StateSpace space(3, 3);
    Rng rng(derive_seed(opt.seed, {5}));
    const auto pi = TabularDistribution::random(space, rng);
    const auto process = constant_process(space);
    const auto oracle = make_oracle_model(pi, process, ModelMode::noisy_marginal);
    const auto xs = all_states(space);
    const double t = 0.5;
    const int dims = space.dims();
    const auto error = [&](double eps) {
      const auto exact = reverse_transition_exact(pi, t - eps, t, process);
      const Eigen::MatrixXd probs = euler_step_probs(*oracle, xs, t, eps, process);
      double worst = 0.0;
      for (std::size_t y = 0; y < xs.size(); ++y)
        for (std::size_t x = 0; x < xs.size(); ++x) {
          double p = 1.0;
          for (int d = 0; d < dims; ++d) p *= probs(static_cast<Eigen::Index>(y) * dims + d, xs[x][static_cast<std::size_t>(d)]);
          worst = std::max(worst, std::abs(p - exact.table(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x))));
        }
      return worst;
    };
    const double e1 = error(1e-2);
    const double e2 = error(5e-3);
    const double e3 = error(2.5e-3);
    const double r1 = e1 / e2;
    const double r2 = e2 / e3;
    r.value = std::max(std::abs(r1 - 4.0), std::abs(r2 - 4.0));
    r.threshold = 1.0;
    r.passed = r.value <= r.threshold;
    r.detail = "errors " + fmt(e1) + ", " + fmt(e2) + ", " + fmt(e3) + "; ratios " + fmt(r1) + ", " + fmt(r2);
  });
}

CheckResult check_analytical_step(const VerifyOptions& opt) {
  return timed("analytical_step", "analytical step matches the exact reverse kernel", [&](CheckResult& r) {
    const StateSpace space(3, 3);
    Rng rng(derive_seed(opt.seed, {6}));
    const auto process = constant_process(space);
    const auto xs = all_states(space);
    const int dims = space.dims();
    const double t = 0.6;
    const double eps = 0.1;

    // Per-dimension marginals of q_{t-eps|t}(. | y) for a generic data law.
    const auto pi = TabularDistribution::random(space, rng);
    const auto oracle = make_oracle_model(pi, process, ModelMode::x0_denoising);
    const auto exact = reverse_transition_exact(pi, t - eps, t, process);
    const Eigen::MatrixXd probs = analytical_step_probs(*oracle, xs, t, eps, process);
    double marg_err = 0.0;
    for (std::size_t y = 0; y < xs.size(); ++y) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dims, space.vocab());
      for (std::size_t x = 0; x < xs.size(); ++x)
        for (int d = 0; d < dims; ++d)
          m(d, xs[x][static_cast<std::size_t>(d)]) += exact.table(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x));
      for (int d = 0; d < dims; ++d)
        marg_err = std::max(marg_err, (m.row(d) - probs.row(static_cast<Eigen::Index>(y) * dims + d)).cwiseAbs().maxCoeff());
    }

    // Full joint law when the data law is a product (the reverse kernel then factorizes).
    std::vector<std::vector<double>> marginals;
    for (int d = 0; d < dims; ++d) {
      std::vector<double> w(static_cast<std::size_t>(space.vocab()));
      for (auto& v : w) v = rng.uniform(0.05, 1.0);
      double z = 0.0;
      for (double v : w) z += v;
      for (auto& v : w) v /= z;
      marginals.push_back(w);
    }
    const auto pi_prod = TabularDistribution::product(space, marginals);
    const auto oracle_prod = make_oracle_model(pi_prod, process, ModelMode::x0_denoising);
    const auto exact_prod = reverse_transition_exact(pi_prod, t - eps, t, process);
    const Eigen::MatrixXd probs_prod = analytical_step_probs(*oracle_prod, xs, t, eps, process);
    double joint_err = 0.0;
    for (std::size_t y = 0; y < xs.size(); ++y)
      for (std::size_t x = 0; x < xs.size(); ++x) {
        double p = 1.0;
        for (int d = 0; d < dims; ++d) p *= probs_prod(static_cast<Eigen::Index>(y) * dims + d, xs[x][static_cast<std::size_t>(d)]);
        joint_err = std::max(joint_err, std::abs(p - exact_prod.table(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x))));
      }

    // One step from T straight to 0, starting from the exact q_T.
    const std::size_t n = opt.level == VerifyLevel::full ? 100000 : 20000;
    const double horizon = process.schedule.horizon();
    const auto q_T = exact_marginal(pi_prod, horizon, process);
    std::vector<State> chains(n);
    auto rngs = chain_rngs(n, derive_seed(opt.seed, {7}));
    for (std::size_t i = 0; i < n; ++i) chains[i] = q_T.sample(rngs[i]);
    for (std::size_t start = 0; start < n; start += 4096) {
      const std::size_t len = std::min<std::size_t>(4096, n - start);
      std::vector<State> block(chains.begin() + static_cast<std::ptrdiff_t>(start),
                               chains.begin() + static_cast<std::ptrdiff_t>(start + len));
      analytical_step(*oracle_prod, block, horizon, horizon, process, std::span<Rng>(rngs).subspan(start, len));
      std::copy(block.begin(), block.end(), chains.begin() + static_cast<std::ptrdiff_t>(start));
    }
    const double tv = tv_distance(empirical_distribution(chains, space), pi_prod);

    r.value = std::max(marg_err, joint_err);
    r.threshold = 1e-9;
    r.passed = marg_err <= 1e-9 && joint_err <= 1e-9 && tv <= 0.05;
    r.detail = "per-dimension marginal error " + fmt(marg_err) + ", product-law joint error " + fmt(joint_err) +
               ", full-denoise TV " + fmt(tv) + " (bound 0.05, " + std::to_string(n) + " samples)";
  });
}

CheckResult check_lb_corrector(const VerifyOptions& opt) {
  return timed("lb_corrector", "locally balanced corrector: balance identity and invariance", [&](CheckResult& r) {
    double identity = 0.0;
    for (BalanceFn g : {BalanceFn::sqrt, BalanceFn::t_over_1pt})
      for (double u : {0.1, 0.5, 1.0, 2.0, 10.0}) identity = std::max(identity, std::abs(balance(g, u) - u * balance(g, 1.0 / u)));

    const StateSpace space(3, 3);
    Rng rng(derive_seed(opt.seed, {8}));
    const auto q = TabularDistribution::random(space, rng);
    const auto oracle = make_fixed_oracle_model(q, 1.0);
    const auto process = constant_process(space);
    const std::size_t n = opt.level == VerifyLevel::full ? 100000 : 20000;
    double worst_tv = 0.0;
    std::string detail;
    for (BalanceFn g : {BalanceFn::sqrt, BalanceFn::t_over_1pt}) {
      auto rngs = chain_rngs(n, derive_seed(opt.seed, {9, static_cast<std::uint64_t>(g)}));
      std::vector<State> xs(n, State(3));
      for (std::size_t i = 0; i < n; ++i)
        for (auto& v : xs[i]) v = rngs[i].uniform_int(0, 2);
      for (int step = 0; step < 500; ++step) lb_corrector_step(*oracle, xs, 0.5, 1e-2, g, process, rngs);
      const double tv = tv_distance(empirical_distribution(xs, space), q);
      worst_tv = std::max(worst_tv, tv);
      detail += std::string(detail.empty() ? "" : ", ") + std::string(balance_fn_name(g)) + " TV " + fmt(tv);
    }
    r.value = worst_tv;
    r.threshold = 0.05;
    r.passed = identity <= 1e-12 && worst_tv <= r.threshold;
    r.detail = "max |g(u) - u g(1/u)| = " + fmt(identity) + "; " + detail;
  });
}

CheckResult check_binary_reduction(const VerifyOptions&) {
  return timed("binary_reduction", "binary simplified l2 term equals 2(1-p)^2 - 1", [&](CheckResult& r) {
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double p = i / 1000.0;
      const double probs[2] = {p, 1.0 - p};
      worst = std::max(worst, std::abs(l2_simplified_term(probs, 0) - (2.0 * (1.0 - p) * (1.0 - p) - 1.0)));
    }
    r.value = worst;
    r.threshold = 1e-14;
    r.passed = worst <= r.threshold;
    r.detail = "max deviation " + fmt(worst) + " over 1001 grid points";
  });
}

CheckResult check_gradients(const VerifyOptions& opt) {
  return timed("gradients", "backpropagation matches central finite differences", [&](CheckResult& r) {
    const StateSpace space(4, 3);
    Rng rng(derive_seed(opt.seed, {10}));
    const auto process = constant_process(space);
    const auto pi = TabularDistribution::random(space, rng);
    std::vector<TrainingTuple> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(sample_training_tuple(pi.sample(rng), process, 0.05, 1.0, 1.0, rng));

    NetworkOptions net;
    net.hidden = 8;
    net.layers = 2;
    net.stream_width = 4;
    net.precision = Precision::float64;
    using Factory = std::unique_ptr<Model> (*)(const StateSpace&, ModelMode, double, const NetworkOptions&);
    const std::pair<const char*, Factory> archs[] = {
        {"ebm", &make_ebm_model}, {"masked", &make_masked_model}, {"hollow", &make_hollow_model}};
    const std::pair<const char*, LossKind> losses[] = {
        {"ce", LossKind::ce_simplified}, {"l2", LossKind::l2_ratio_simplified}, {"x0", LossKind::x0_ce}};

    double worst = 0.0;
    std::string detail;
    for (const auto& [arch, factory] : archs)
      for (const auto& [lname, loss] : losses) {
        const ModelMode mode = loss == LossKind::x0_ce ? ModelMode::x0_denoising : ModelMode::noisy_marginal;
        auto model = factory(space, mode, 1.0, net);
        Rng init(derive_seed(opt.seed, {11}));
        model->initialize(init, true);
        const auto eval = [&](bool grad) {
          switch (loss) {
            case LossKind::ce_simplified:
              return loss_ce_simplified(*model, batch, grad);
            case LossKind::l2_ratio_simplified:
              return loss_l2_ratio_simplified(*model, batch, grad);
            default:
              return loss_x0_ce(*model, batch, process, grad);
          }
        };
        const auto analytic = eval(true);
        auto values = model->params().values();
        double case_worst = 0.0;
        for (int k = 0; k < 20; ++k) {
          const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(values.size()) - 1));
          const double saved = values[i];
          const double h = 1e-5 * std::max(1.0, std::abs(saved));
          values[i] = saved + h;
          const double up = eval(false).value;
          values[i] = saved - h;
          const double down = eval(false).value;
          values[i] = saved;
          const double fd = (up - down) / (2.0 * h);
          const double denom = std::max({std::abs(fd), std::abs(analytic.grad[i]), 1e-6});
          case_worst = std::max(case_worst, std::abs(fd - analytic.grad[i]) / denom);
        }
        worst = std::max(worst, case_worst);
        detail += std::string(detail.empty() ? "" : ", ") + arch + "/" + lname + " " + fmt(case_worst);
      }
    r.value = worst;
    r.threshold = 1e-4;
    r.passed = worst <= r.threshold;
    r.detail = "max relative error: " + detail;
  });
}

CheckResult check_leak_freedom(const VerifyOptions& opt) {
  return timed("leak_freedom", "masked and hollow outputs ignore their own input", [&](CheckResult& r) {
    const StateSpace space(8, 4);
    NetworkOptions net;
    net.hidden = 32;
    net.layers = 2;
    net.stream_width = 8;
    const int trials = 10000;
    int violations = 0;
    double deviation = 0.0;
    std::string detail;
    for (const auto& [name, model] : {std::pair{"masked", make_masked_model(space, ModelMode::noisy_marginal, 1.0, net)},
                                      std::pair{"hollow", make_hollow_model(space, ModelMode::noisy_marginal, 1.0, net)}}) {
      Rng rng(derive_seed(opt.seed, {12}));
      model->initialize(rng, true);
      const auto rep = leak_check(*model, trials, rng);
      violations += rep.violations;
      deviation = std::max(deviation, rep.max_deviation);
      detail += std::string(detail.empty() ? "" : ", ") + name + " " + std::to_string(rep.violations) + "/" +
                std::to_string(rep.trials);
    }
    r.value = deviation;
    r.threshold = 0.0;
    r.passed = violations == 0 && deviation == 0.0;
    r.detail = "violations: " + detail;
  });
}

namespace {

struct DualMmd {
  double biased = 0.0;
  double unbiased = 0.0;
  double unbiased_stderr = 0.0;
};

// Both estimators on the same draws; seeds follow evaluate_run.
DualMmd dual_mmd(const SampleFn& generate, const DataSource& data, const ToyMmdOptions& toy) {
  MmdConfig biased;
  biased.samples = toy.samples;
  MmdConfig unbiased = biased;
  unbiased.estimator = MmdEstimator::unbiased;
  std::vector<double> b, u;
  for (int r = 0; r < toy.repeats; ++r) {
    const auto rr = static_cast<std::uint64_t>(r);
    const auto x = generate(toy.samples, derive_seed(toy.seed, {rr, 1}));
    const auto y = data.sample(toy.samples, derive_seed(toy.seed, {rr, 2}));
    b.push_back(mmd_exp_hamming(x, y, data.space(), biased));
    u.push_back(mmd_exp_hamming(x, y, data.space(), unbiased));
  }
  const auto n = static_cast<double>(u.size());
  DualMmd out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.biased += b[i] / n;
    out.unbiased += u[i] / n;
  }
  double var = 0.0;
  for (double v : u) var += (v - out.unbiased) * (v - out.unbiased);
  out.unbiased_stderr = u.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
  return out;
}

}  // namespace

CheckResult check_toy_mmd(const ToyMmdOptions& toy, const std::function<void(const std::string&)>& log) {
  return timed("toy_mmd_" + std::to_string(toy.bits) + "bit",
               "2spirals EBM at " + std::to_string(toy.bits) + " bits/axis beats the null and untrained gates",
               [&](CheckResult& r) {
                 ToyDatasetSpec spec;
                 spec.density = ToyDensity::two_spirals;
                 spec.bits_per_axis = toy.bits;
                 const ToyDataSource data(spec);
                 const StateSpace space = data.space();
                 const ForwardProcess process{space, NoiseSchedule::constant(1.0, toy.horizon), RateSpec::uniform(2)};
                 NetworkOptions net;
                 net.hidden = toy.hidden;
                 net.layers = toy.layers;
                 auto model = make_ebm_model(space, ModelMode::noisy_marginal, toy.horizon, net);
                 Rng init(derive_seed(toy.seed, {1}));
                 model->initialize(init);

                 SamplerConfig sc;
                 sc.steps = toy.sampler_steps;
                 const auto sampler = [&](const Model& m) {
                   return [&m, &sc, &process](std::size_t n, std::uint64_t seed) {
                     SamplerConfig c = sc;
                     c.seed = seed;
                     return sample_reverse(m, n, c, process);
                   };
                 };
                 const auto show = [](const DualMmd& m) {
                   return fmt(m.unbiased) + " +- " + fmt(m.unbiased_stderr) + " (biased " + fmt(m.biased) + ")";
                 };
                 const auto null_run =
                     dual_mmd([&](std::size_t n, std::uint64_t seed) { return data.sample(n, seed); }, data, toy);
                 // Unbiased null is zero up to noise; its level is the top of the 3-stderr band.
                 const double null_level = std::abs(null_run.unbiased) + 3.0 * null_run.unbiased_stderr;
                 if (log) log("data-vs-data MMD " + show(null_run));
                 const auto untrained = dual_mmd(sampler(*model), data, toy);
                 if (log) log("untrained MMD " + show(untrained));

                 TrainConfig tc;
                 tc.steps = toy.steps;
                 tc.batch_size = toy.batch_size;
                 tc.learning_rate = toy.learning_rate;
                 tc.seed = derive_seed(toy.seed, {2});
                 tc.eval_every = std::max<long>(1, toy.steps / 10);
                 const auto result = train(*model, data, process, tc, [&](const MetricRow& row) {
                   if (log) log("step " + std::to_string(row.step) + " loss " + fmt(row.loss));
                 });
                 const auto trained = dual_mmd(sampler(*model), data, toy);
                 if (log) log("trained MMD " + show(trained));

                 r.value = trained.unbiased;
                 r.threshold = 10.0 * null_level;
                 r.passed = trained.unbiased < 10.0 * null_level && trained.unbiased * 10.0 <= untrained.unbiased;
                 r.detail = "unbiased MMD x1e4: trained " + fmt(trained.unbiased * 1e4) + ", null level " +
                            fmt(null_level * 1e4) + ", untrained " + fmt(untrained.unbiased * 1e4) +
                            "; biased x1e4: trained " + fmt(trained.biased * 1e4) + ", null " +
                            fmt(null_run.biased * 1e4) + ", untrained " + fmt(untrained.biased * 1e4) +
                            "; final loss " + fmt(result.metrics.empty() ? 0.0 : result.metrics.back().loss) + ", " +
                            std::to_string(toy.steps) + " steps";
               });
}

CheckResult check_path_kl(const VerifyOptions& opt) {
  return timed("path_kl", "path objective is minimized by the exact ratios", [&](CheckResult& r) {
    const StateSpace space(3, 3);
    Rng rng(derive_seed(opt.seed, {13}));
    const auto pi = TabularDistribution::random(space, rng);
    const auto process = constant_process(space);
    const PathKlOptions po;
    const auto oracle = make_oracle_model(pi, process, ModelMode::noisy_marginal);
    const double exact = path_kl_exact_ratios(pi, process, po);
    const double with_model = loss_path_kl_tabular(*oracle, pi, process, po, false).value;
    const double gap = std::abs(exact - with_model);
    int decreases = 0;
    double smallest = std::numeric_limits<double>::infinity();
    const auto rows = static_cast<Eigen::Index>(space.state_count()) * space.dims();
    for (int k = 0; k < 20; ++k) {
      Eigen::MatrixXd noise(rows, space.vocab());
      for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = rng.uniform(-0.3, 0.3);
      const PerturbedModel perturbed(*oracle, noise);
      const double v = loss_path_kl_tabular(perturbed, pi, process, po, false).value;
      smallest = std::min(smallest, v - with_model);
      if (v < with_model) ++decreases;
    }
    r.value = gap;
    r.threshold = 1e-8;
    r.passed = gap <= r.threshold && decreases == 0;
    r.detail = "|model - exact| = " + fmt(gap) + ", perturbations lowering the objective: " + std::to_string(decreases) +
               "/20 (smallest increase " + fmt(smallest) + ")";
  });
}

CheckResult check_ordinal_score(const VerifyOptions& opt) {
  return timed("ordinal_score", "ordinal score target and birth/death invariance", [&](CheckResult& r) {
    const OrdinalKernelSpec kernel{0.7, 12};
    double target_err = 0.0;
    for (double t : {0.05, 0.3, 1.0})
      for (int x0 = 0; x0 < kernel.vocab; ++x0)
        for (int xt = 1; xt + 1 < kernel.vocab; ++xt) {
          const double closed = -2.0 * (xt - x0) / (kernel.corrupt_rate * t);
          target_err = std::max(target_err, std::abs(ordinal_score_target(kernel, x0, t, xt) - closed));
        }

    const StateSpace space(2, 8, true);
    std::vector<double> w(space.state_count());
    for (std::uint64_t i = 0; i < space.state_count(); ++i) {
      const State s = space.state_at(i);
      w[i] = std::pow(0.7, s[0] + s[1]);
    }
    const auto q = TabularDistribution::from_weights(space, w);
    const std::size_t n = opt.level == VerifyLevel::full ? 100000 : 20000;
    auto rngs = chain_rngs(n, derive_seed(opt.seed, {14}));
    std::vector<State> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = q.sample(rngs[i]);
    for (int step = 0; step < 200; ++step)
      ordinal_birth_death_step(xs, ordinal_ratios_exact(q, xs), 0.05, BalanceFn::sqrt, space.vocab(), rngs);
    const double tv = tv_distance(empirical_distribution(xs, space), q);
    r.value = tv;
    r.threshold = 0.05;
    r.passed = target_err <= 1e-10 && tv <= r.threshold;
    r.detail = "interior target error " + fmt(target_err) + "; geometric q_t TV after 200 moves " + fmt(tv);
  });
}

std::vector<CheckResult> run_verification(const VerifyOptions& opt,
                                          const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> out;
  const auto add = [&](CheckResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  add(check_loss_equivalence(opt));
  add(check_reverse_simulation(opt));
  add(check_reverse_negative_control(opt));
  add(check_kolmogorov_residual(opt));
  add(check_euler_order(opt));
  add(check_analytical_step(opt));
  add(check_lb_corrector(opt));
  add(check_binary_reduction(opt));
  add(check_gradients(opt));
  add(check_leak_freedom(opt));
  add(check_path_kl(opt));
  add(check_ordinal_score(opt));
  ToyMmdOptions toy;
  toy.seed = opt.seed;
  if (opt.level == VerifyLevel::full) {
    add(check_toy_mmd(toy));
  } else {
    CheckResult skipped;
    skipped.id = "toy_mmd_6bit";
    skipped.name = "2spirals EBM MMD gates";
    skipped.skipped = true;
    skipped.detail = "training run; full level only";
    add(skipped);
  }
  if (opt.long_run) {
    toy.bits = 16;
    toy.batch_size = 128;
    add(check_toy_mmd(toy));
  }
  return out;
}

nlohmann::json verdict_json(const std::vector<CheckResult>& results, const VerifyOptions& opt) {
  nlohmann::json checks = nlohmann::json::array();
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && (r.passed || r.skipped);
    checks.push_back({{"id", r.id},
                      {"name", r.name},
                      {"status", r.status()},
                      {"value", r.value},
                      {"threshold", r.threshold},
                      {"detail", r.detail},
                      {"seconds", r.seconds}});
  }
  return {{"tool", kToolVersion},
          {"level", opt.level == VerifyLevel::full ? "full" : "fast"},
          {"seed", opt.seed},
          {"passed", ok},
          {"checks", checks}};
}

}  // namespace cdiff
