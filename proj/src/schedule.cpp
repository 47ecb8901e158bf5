#include "jamloc/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jamloc {

void ScheduleSpec::validate() const {
  if (total_epochs <= 0) throw std::invalid_argument("schedule: total_epochs must be positive");
  if (kind == ScheduleKind::warmup_then_cosine && (warmup_fraction < 0 || warmup_fraction >= 1))
    throw std::invalid_argument("schedule: warmup_fraction must be in [0, 1)");
}

double schedule_value_at(const ScheduleSpec& s, double epoch) {
  s.validate();
  if (!(epoch >= 0.0 && epoch <= s.total_epochs))
    throw std::out_of_range("schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(s.total_epochs) + "]");
  const double total = s.total_epochs;
  const double span = s.end_value - s.start_value;
  switch (s.kind) {
    case ScheduleKind::linear:
      return s.start_value + span * epoch / total;
    case ScheduleKind::cosine_anneal:
      return s.end_value + (s.start_value - s.end_value) * 0.5 *
                               (1.0 + std::cos(std::numbers::pi * epoch / total));
    case ScheduleKind::warmup_then_cosine: {
      const double warm = s.warmup_fraction * total;
      if (warm > 0.0 && epoch < warm) return s.start_value * epoch / warm;
      const double rest = total - warm;
      const double frac = rest > 0.0 ? (epoch - warm) / rest : 1.0;
      return s.end_value + (s.start_value - s.end_value) * 0.5 *
                               (1.0 + std::cos(std::numbers::pi * frac));
    }
    case ScheduleKind::sigmoid_ramp: {
      const double z = s.steepness * (2.0 * epoch / total - 1.0);
      return s.start_value + span / (1.0 + std::exp(-z));
    }
  }
  throw std::logic_error("unknown schedule kind");
}

double schedule_value(const ScheduleSpec& s, int epoch) {
  return schedule_value_at(s, static_cast<double>(epoch));
}

std::string to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::linear: return "linear";
    case ScheduleKind::cosine_anneal: return "cosine_anneal";
    case ScheduleKind::warmup_then_cosine: return "warmup_then_cosine";
    case ScheduleKind::sigmoid_ramp: return "sigmoid_ramp";
  }
  return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "linear") return ScheduleKind::linear;
  if (s == "cosine_anneal") return ScheduleKind::cosine_anneal;
  if (s == "warmup_then_cosine") return ScheduleKind::warmup_then_cosine;
  if (s == "sigmoid_ramp") return ScheduleKind::sigmoid_ramp;
  throw std::invalid_argument("unknown schedule kind '" + s + "'");
}

}  // namespace jamloc
