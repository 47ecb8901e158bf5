#include "jamloc/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace jamloc {
namespace {

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::array<Point2, 4> image_sources(const SynthConfig& c, Point2 j) {
  return {{{-j.x, j.y}, {2.0 * c.width_cm - j.x, j.y}, {j.x, -j.y}, {j.x, 2.0 * c.height_cm - j.y}}};
}

void add_pulse(std::vector<std::complex<double>>& cir, double delay, std::complex<double> amp,
               double width) {
  const int lo = std::max(0, static_cast<int>(std::floor(delay - 4.0 * width)));
  const int hi = std::min(static_cast<int>(cir.size()) - 1,
                          static_cast<int>(std::ceil(delay + 4.0 * width)));
  for (int k = lo; k <= hi; ++k) {
    const double u = (k - delay) / width;
    cir[k] += amp * std::exp(-0.5 * u * u);
  }
}

std::complex<double> phasor(double phase) { return std::polar(1.0, phase); }

}  // namespace

void SynthConfig::validate() const {
  if (width_cm <= 0 || height_cm <= 0) throw std::invalid_argument("synth: bad room size");
  if (samples_per_position <= 0)
    throw std::invalid_argument("synth: samples_per_position must be positive");
  if (jammer_positions.empty()) throw std::invalid_argument("synth: no jammer positions");
  for (std::size_t i = 0; i < jammer_positions.size(); ++i) {
    const auto& p = jammer_positions[i];
    if (!(p.x >= 0.0 && p.x <= width_cm && p.y >= 0.0 && p.y <= height_cm))
      throw std::invalid_argument("synth: jammer position " + std::to_string(i) +
                                  " outside the grid bounds");
  }
  if (tap_spacing_cm <= 0 || pulse_width_taps <= 0 || wavelength_cm <= 0)
    throw std::invalid_argument("synth: non-positive propagation constants");
  if (clutter_taps < 0) throw std::invalid_argument("synth: negative clutter tap count");
}

double direct_delay_taps(const SynthConfig& c, Point2 jammer, int receiver) {
  const double d = dist(jammer, c.receivers.at(receiver));
  return c.first_path_offset_taps + d / c.tap_spacing_cm;
}

SampleSet synth_generate(const SynthConfig& c, std::uint64_t seed) {
  c.validate();
  // Clutter scatterers are part of the room layout, not of the draw.
  std::vector<Point2> scatterers;
  {
    std::mt19937_64 layout(c.layout_seed);
    std::uniform_real_distribution<double> ux(0.1 * c.width_cm, 0.9 * c.width_cm);
    std::uniform_real_distribution<double> uy(0.1 * c.height_cm, 0.9 * c.height_cm);
    for (int i = 0; i < c.clutter_taps; ++i) {
      const double x = ux(layout);
      scatterers.push_back({x, uy(layout)});
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uphase(0.0, 2.0 * std::numbers::pi);

  SampleSet set;
  set.provenance = Provenance::synthetic;
  set.domain = c.domain;
  set.seed = seed;
  set.samples.reserve(c.jammer_positions.size() * c.samples_per_position * 4);

  std::int64_t next_id = 0;
  const double k_wave = 2.0 * std::numbers::pi / c.wavelength_cm;
  for (std::size_t p = 0; p < c.jammer_positions.size(); ++p) {
    const Point2 jam = c.jammer_positions[p];
    const auto images = image_sources(c, jam);
    for (int round = 0; round < c.samples_per_position; ++round) {
      for (int r = 0; r < 4; ++r) {
        const Point2 rx = c.receivers[r];
        CirSample s;
        s.sample_id = next_id++;
        s.receiver_id = r;
        s.position_id = c.first_position_id + static_cast<int>(p);
        s.x_cm = jam.x;
        s.y_cm = jam.y;
        s.domain = c.domain;

        const double common = uphase(rng);
        auto jitter_gain = [&] { return std::exp(c.amplitude_jitter * gauss(rng)); };
        auto jitter_path = [&](double path) { return path + c.delay_jitter_cm * gauss(rng); };
        const double d = jitter_path(dist(jam, rx));
        auto delay_of = [&](double path) {
          return c.first_path_offset_taps + path / c.tap_spacing_cm;
        };

        const double a_direct = jitter_gain() / (1.0 + d / 100.0);
        const double fp_delay = delay_of(d);
        add_pulse(s.cir, fp_delay, a_direct * phasor(common - k_wave * d), c.pulse_width_taps);

        std::array<double, 4> refl_path{}, refl_amp{};
        double refl_sum = 0.0;
        for (int w = 0; w < 4; ++w) {
          refl_path[w] = jitter_path(dist(images[w], rx));
          refl_amp[w] = c.wall_reflection[w] * c.reflection_scale[w] * jitter_gain() /
                        (1.0 + refl_path[w] / 100.0);
          refl_sum += refl_amp[w];
        }
        const double cap = c.max_multipath_ratio * a_direct;
        const double shrink = refl_sum > cap && refl_sum > 0.0 ? cap / refl_sum : 1.0;
        for (int w = 0; w < 4; ++w)
          add_pulse(s.cir, delay_of(refl_path[w]),
                    shrink * refl_amp[w] * phasor(common - k_wave * refl_path[w]),
                    c.pulse_width_taps);

        for (const auto& sc : scatterers) {
          const double path = jitter_path(dist(jam, sc) + dist(sc, rx));
          const double amp = c.clutter_amplitude * jitter_gain() / (1.0 + path / 100.0);
          add_pulse(s.cir, delay_of(path), amp * phasor(common - k_wave * path),
                    c.pulse_width_taps);
        }

        add_pulse(s.cir, 1.0 + r, c.receiver_echo_amplitude * phasor(common + r * 0.5 * std::numbers::pi),
                  c.pulse_width_taps);

        const double sigma = c.noise_std / std::numbers::sqrt2;
        for (int k = 0; k < kCirTaps; ++k) {
          if (k > fp_delay + 1.0) {
            const double env = c.tail_level * a_direct * std::exp(-(k - fp_delay) / c.tail_decay_taps);
            s.cir[k] += env * std::complex<double>(gauss(rng), gauss(rng)) / std::numbers::sqrt2;
          }
          s.cir[k] += std::complex<double>(sigma * gauss(rng), sigma * gauss(rng));
        }

        // Diagnostics: noisy monotone functions of distance and first-path energy.
        const int fp = std::clamp(static_cast<int>(std::lround(fp_delay)), 1, kCirTaps - 2);
        double power = 0.0;
        for (const auto& v : s.cir) power += std::norm(v);
        const double near = d / 100.0;
        auto& g = s.diagnostics;
        g[0] = 20.0 * std::exp(-near / 3.0) + gauss(rng);                // PHE
        g[1] = 40.0 * std::exp(-near / 2.5) + gauss(rng);                // RSL
        g[2] = 100.0 - 30.0 * std::exp(-near / 2.5) + 2.0 * gauss(rng);  // CRCG
        g[3] = 25.0 * std::exp(-near / 2.0) + gauss(rng);                // CRCB
        g[4] = 10.0 * std::exp(-near / 3.5) + 0.5 * gauss(rng);          // PREJ
        g[5] = -60.0 - 20.0 * std::log10(std::max(d, 10.0) / 100.0) + c.rssi_offset_db +
               gauss(rng);                                                // RSSI
        g[6] = 1000.0 * std::abs(s.cir[fp]);                              // IpatovPeak
        g[7] = 1e4 * power;                                               // IpatovPower
        g[8] = 1000.0 * std::abs(s.cir[fp - 1]);                          // IpatovF1
        g[9] = 1000.0 * std::abs(s.cir[fp]);                              // IpatovF2
        g[10] = 1000.0 * std::abs(s.cir[fp + 1]);                         // IpatovF3

        set.samples.push_back(std::move(s));
      }
    }
  }
  return set;
}

std::vector<Point2> grid_positions(double width, double height, int cols, int rows,
                                   double margin_x, double margin_y) {
  std::vector<Point2> out;
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i) {
      const double x = cols == 1 ? width / 2 : margin_x + (width - 2 * margin_x) * i / (cols - 1);
      const double y =
          rows == 1 ? height / 2 : margin_y + (height - 2 * margin_y) * j / (rows - 1);
      out.push_back({x, y});
    }
  return out;
}

namespace {

SynthConfig shifted_target(SynthConfig t) {
  t.domain = Domain::target;
  t.first_position_id = 1000;
  t.reflection_scale = {0.2, 1.8, 1.5, 0.6};
  t.max_multipath_ratio = 0.6;
  t.clutter_taps = 6;
  t.clutter_amplitude = 0.35;
  t.rssi_offset_db = -3.0;
  return t;
}

}  // namespace

SynthPreset benchmark_preset(int samples_per_position) {
  SynthPreset p;
  p.source.jammer_positions = grid_positions(300.0, 500.0, 4, 4, 45.0, 60.0);
  p.source.samples_per_position = samples_per_position;
  p.target = shifted_target(p.source);
  p.target.jammer_positions = grid_positions(300.0, 500.0, 2, 4, 95.0, 110.0);
  return p;
}

SynthPreset campaign_preset(int samples_per_position) {
  SynthPreset p;
  p.source.jammer_positions = grid_positions(300.0, 500.0, 4, 13, 37.5, 20.0);
  p.source.samples_per_position = samples_per_position;
  p.target = shifted_target(p.source);
  p.target.jammer_positions = grid_positions(300.0, 500.0, 4, 4, 60.0, 70.0);
  return p;
}

}  // namespace jamloc
