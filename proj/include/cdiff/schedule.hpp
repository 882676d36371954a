#pragma once

#include <string>
#include <string_view>

namespace cdiff {

enum class ScheduleKind { constant, cosine };

ScheduleKind parse_schedule_kind(std::string_view s);
std::string_view schedule_kind_name(ScheduleKind k);

// Time schedule beta(t) of the forward rate Q_t = beta(t) * Q.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  NoiseSchedule(ScheduleKind kind, double base_rate = 1.0, double horizon = 1.0);

  static NoiseSchedule constant(double base_rate, double horizon = 1.0) {
    return NoiseSchedule(ScheduleKind::constant, base_rate, horizon);
  }
  static NoiseSchedule cosine(double horizon = 1.0) { return NoiseSchedule(ScheduleKind::cosine, 1.0, horizon); }

  ScheduleKind kind() const { return kind_; }
  double base_rate() const { return base_rate_; }
  double horizon() const { return horizon_; }

  double beta(double t) const;
  // Integral of beta over [s, t]; requires s <= t.
  double cumulative(double s, double t) const;
  // Smallest t* in [s, horizon] with cumulative(s, t*) >= amount, or +inf if the
  // schedule cannot accumulate that much before the horizon.
  double advance(double s, double amount) const;

 private:
  double integral_from_zero(double t) const;

  ScheduleKind kind_ = ScheduleKind::constant;
  double base_rate_ = 1.0;
  double horizon_ = 1.0;
};

}  // namespace cdiff
