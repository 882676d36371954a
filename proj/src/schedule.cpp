#include "cdiff/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cdiff/error.hpp"

namespace cdiff {

ScheduleKind parse_schedule_kind(std::string_view s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "cosine") return ScheduleKind::cosine;
  throw ConfigError("unknown schedule kind '" + std::string(s) + "' (expected constant or cosine)");
}

std::string_view schedule_kind_name(ScheduleKind k) { return k == ScheduleKind::constant ? "constant" : "cosine"; }

NoiseSchedule::NoiseSchedule(ScheduleKind kind, double base_rate, double horizon)
    : kind_(kind), base_rate_(base_rate), horizon_(horizon) {
  if (!(base_rate >= 0.0) || !std::isfinite(base_rate)) throw ConfigError("schedule base_rate must be finite and >= 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("schedule horizon must be positive");
}

double NoiseSchedule::beta(double t) const {
  if (kind_ == ScheduleKind::constant) return base_rate_;
  // d/dt [1 - sqrt(cos(pi t / 2))]
  const double a = std::numbers::pi * t / 2.0;
  const double c = std::max(std::cos(a), 0.0);
  if (c <= 0.0) return std::numeric_limits<double>::infinity();
  return std::numbers::pi / 4.0 * std::sin(a) / std::sqrt(c);
}

double NoiseSchedule::integral_from_zero(double t) const {
  if (kind_ == ScheduleKind::constant) return base_rate_ * t;
  return 1.0 - std::sqrt(std::max(std::cos(std::numbers::pi * t / 2.0), 0.0));
}

double NoiseSchedule::cumulative(double s, double t) const {
  if (s > t) throw DomainError("cumulative rate needs s <= t (s=" + std::to_string(s) + ", t=" + std::to_string(t) + ")");
  if (s == t) return 0.0;
  if (kind_ == ScheduleKind::constant) return base_rate_ * (t - s);
  return std::max(integral_from_zero(t) - integral_from_zero(s), 0.0);
}

double NoiseSchedule::advance(double s, double amount) const {
  if (amount <= 0.0) return s;
  if (kind_ == ScheduleKind::constant) {
    if (base_rate_ <= 0.0) return std::numeric_limits<double>::infinity();
    const double t = s + amount / base_rate_;
    return t <= horizon_ ? t : std::numeric_limits<double>::infinity();
  }
  if (cumulative(s, horizon_) < amount) return std::numeric_limits<double>::infinity();
  // The integral is monotone, so bisection converges unconditionally.
  double lo = s;
  double hi = horizon_;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (cumulative(s, mid) < amount)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace cdiff
