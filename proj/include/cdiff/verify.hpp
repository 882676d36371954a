#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cdiff {

enum class VerifyLevel { fast, full };

VerifyLevel parse_verify_level(std::string_view s);

struct CheckResult {
  std::string id;
  std::string name;
  bool passed = false;
  bool skipped = false;
  // Headline measurement and the bound it is compared against.
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;

  std::string status() const { return skipped ? "skipped" : passed ? "pass" : "fail"; }
};

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::fast;
  std::uint64_t seed = 7;
  // Adds the 16-bit toy run (hours on one core).
  bool long_run = false;
};

// Settings of the toy-density MMD run. The gates use the unbiased estimator:
// trained < 10 x null level and 10 x trained <= untrained, where the null level
// is |mean| + 3 stderr of the data-vs-data run.
struct ToyMmdOptions {
  int bits = 6;
  long steps = 50000;
  int batch_size = 64;
  double learning_rate = 1e-4;
  int hidden = 128;
  int layers = 3;
  double horizon = 2.0;
  int sampler_steps = 100;
  int repeats = 10;
  std::size_t samples = 4000;
  std::uint64_t seed = 7;
};

CheckResult check_loss_equivalence(const VerifyOptions& opt);
CheckResult check_reverse_simulation(const VerifyOptions& opt);
// Passes when the sign-flipped reverse rate is detected (TV above the bound).
CheckResult check_reverse_negative_control(const VerifyOptions& opt);
CheckResult check_kolmogorov_residual(const VerifyOptions& opt);
CheckResult check_euler_order(const VerifyOptions& opt);
CheckResult check_analytical_step(const VerifyOptions& opt);
CheckResult check_lb_corrector(const VerifyOptions& opt);
CheckResult check_binary_reduction(const VerifyOptions& opt);
CheckResult check_gradients(const VerifyOptions& opt);
CheckResult check_leak_freedom(const VerifyOptions& opt);
CheckResult check_toy_mmd(const ToyMmdOptions& toy, const std::function<void(const std::string&)>& log = {});
CheckResult check_path_kl(const VerifyOptions& opt);
CheckResult check_ordinal_score(const VerifyOptions& opt);

// Runs every check of the level in a fixed order; on_result sees each one as
// it finishes.
std::vector<CheckResult> run_verification(const VerifyOptions& opt,
                                          const std::function<void(const CheckResult&)>& on_result = {});

nlohmann::json verdict_json(const std::vector<CheckResult>& results, const VerifyOptions& opt);

}  // namespace cdiff
