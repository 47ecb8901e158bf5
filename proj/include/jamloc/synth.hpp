#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "jamloc/dataset.hpp"

namespace jamloc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Geometric multipath simulator standing in for the measurement campaign.
// Each jammer position is observed for `samples_per_position` rounds; every
// round produces one sample per receiver.
//
// A sample's CIR is the sum of complex arrivals, each a Gaussian pulse of
// width `pulse_width_taps` centred at
//     first_path_offset_taps + path_length / tap_spacing_cm
// with phase -2 pi path / wavelength plus a random common phase:
//   - the direct path, amplitude g / (1 + d / 100)
//   - one image-source reflection per wall, amplitude scaled by
//     wall_reflection[w] * reflection_scale[w]; the reflections together are
//     capped at max_multipath_ratio of the direct amplitude
//   - clutter scatterers (jammer -> scatterer -> receiver), positions fixed by
//     layout_seed, amplitude clutter_amplitude / (1 + path / 100)
//   - a receiver-specific antenna echo at tap 1 + receiver_id
//   - a diffuse exponential tail and complex Gaussian noise.
struct SynthConfig {
  double width_cm = 300.0;
  double height_cm = 500.0;
  std::array<Point2, 4> receivers{{{20.0, 20.0}, {280.0, 20.0}, {20.0, 480.0}, {280.0, 480.0}}};
  std::vector<Point2> jammer_positions;
  int first_position_id = 0;
  int samples_per_position = 100;
  Domain domain = Domain::source;

  double tap_spacing_cm = 30.0;
  double first_path_offset_taps = 8.0;
  double pulse_width_taps = 0.7;
  double wavelength_cm = 4.6;
  std::array<double, 4> wall_reflection{0.45, 0.40, 0.35, 0.30};  // x=0, x=W, y=0, y=H
  std::array<double, 4> reflection_scale{1.0, 1.0, 1.0, 1.0};
  double max_multipath_ratio = 0.25;
  int clutter_taps = 0;
  double clutter_amplitude = 0.0;
  std::uint64_t layout_seed = 17;
  double receiver_echo_amplitude = 0.05;
  double tail_level = 0.02;
  double tail_decay_taps = 12.0;
  double noise_std = 0.003;
  double delay_jitter_cm = 3.0;
  double amplitude_jitter = 0.05;
  double rssi_offset_db = 0.0;

  void validate() const;
};

SampleSet synth_generate(const SynthConfig& config, std::uint64_t seed);

// Direct-path delay in taps for a jammer/receiver pair (no jitter).
double direct_delay_taps(const SynthConfig& config, Point2 jammer, int receiver);

// Regular grid of cols x rows positions inset by `margin` from the walls.
std::vector<Point2> grid_positions(double width, double height, int cols, int rows,
                                   double margin_x, double margin_y);

// Layouts used throughout the tests, benchmark and CLI presets.
struct SynthPreset {
  SynthConfig source;
  SynthConfig target;
};
// 16 source positions / 8 target positions with shifted reflections and
// furniture clutter in the target room.
SynthPreset benchmark_preset(int samples_per_position);
// 52 source / 16 target positions, the campaign's grid sizes.
SynthPreset campaign_preset(int samples_per_position);

}  // namespace jamloc
