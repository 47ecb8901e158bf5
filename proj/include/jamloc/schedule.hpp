#pragma once

#include <string>

namespace jamloc {

enum class ScheduleKind { linear, cosine_anneal, warmup_then_cosine, sigmoid_ramp };

// Epoch-indexed scalar schedule for learning rates and loss weights.
//   linear:             start + (end - start) * e / total
//   cosine_anneal:      end + (start - end) * (1 + cos(pi * e / total)) / 2
//   warmup_then_cosine: 0 -> start linearly over warmup_fraction * total,
//                       then cosine from start down to end
//   sigmoid_ramp:       start + (end - start) * logistic(k * (2 e / total - 1))
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::linear;
  double start_value = 0.0;
  double end_value = 0.0;
  int total_epochs = 1;
  double warmup_fraction = 0.1;
  double steepness = 10.0;

  static ScheduleSpec constant(double v, int total) {
    return {ScheduleKind::linear, v, v, total};
  }
  void validate() const;
};

double schedule_value(const ScheduleSpec& s, int epoch);
// Same curve evaluated at a fractional epoch, used for per-step learning rates.
double schedule_value_at(const ScheduleSpec& s, double epoch);

std::string to_string(ScheduleKind k);
ScheduleKind schedule_kind_from_string(const std::string& s);

}  // namespace jamloc
