#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "jamloc/dataset.hpp"
#include "jamloc/synth.hpp"
#include "test_util.hpp"

using namespace jamloc;
namespace fs = std::filesystem;
using jamloc::testing::scratch_dir;

namespace {

SampleSet grid_set(int positions, int per_position, std::uint64_t seed = 0) {
  SampleSet set;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::int64_t id = 0;
  for (int p = 0; p < positions; ++p)
    for (int r = 0; r < per_position; ++r) {
      CirSample s;
      s.sample_id = id++;
      s.receiver_id = r % 4;
      s.position_id = p;
      s.x_cm = 10.0 * (p % 10);
      s.y_cm = 20.0 * (p / 10);
      for (auto& d : s.diagnostics) d = g(rng);
      for (auto& c : s.cir) c = {g(rng), g(rng)};
      set.samples.push_back(s);
    }
  return set;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Replaces field `col` of data row `row` (0-based, after the header).
void patch_field(const fs::path& csv, int row, int col, const std::string& value) {
  std::stringstream in(read_file(csv));
  std::string line, out;
  int r = -1;
  while (std::getline(in, line)) {
    if (r == row) {
      std::vector<std::string> f;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) f.push_back(cell);
      f[col] = value;
      line.clear();
      for (std::size_t i = 0; i < f.size(); ++i) line += (i ? "," : "") + f[i];
    }
    out += line + "\n";
    ++r;
  }
  write_file(csv, out);
}

}  // namespace

TEST(DatasetIo, SingleZeroRowRoundTrip) {
  SampleSet set;
  set.samples.push_back(CirSample{});
  const auto dir = scratch_dir("zero_row");
  write_dataset(set, dir);
  const auto back = load_dataset(dir);
  ASSERT_EQ(back.size(), 1u);
  for (const auto& c : back.samples[0].cir) EXPECT_EQ(c, std::complex<double>(0, 0));
  EXPECT_EQ(back.samples[0].x_cm, 0.0);
}

TEST(DatasetIo, RoundTripIsFieldwiseEqual) {
  auto set = grid_set(3, 5, 9);
  set.seed = 9;
  set.domain = Domain::target;
  for (auto& s : set.samples) s.domain = Domain::target;
  const auto dir = scratch_dir("round_trip");
  write_dataset(set, dir);
  const auto back = load_dataset(dir);
  ASSERT_EQ(back.size(), set.size());
  EXPECT_EQ(back.domain, Domain::target);
  EXPECT_EQ(back.seed, std::optional<std::uint64_t>(9));
  for (std::size_t i = 0; i < set.size(); ++i) EXPECT_EQ(back.samples[i], set.samples[i]);
}

TEST(DatasetIo, HeaderLayout) {
  const auto h = dataset_header();
  ASSERT_EQ(h.size(), 2u + 11u + 600u + 4u);
  EXPECT_EQ(h[0], "sample_id");
  EXPECT_EQ(h[2], "PHE");
  EXPECT_EQ(h[13], "cir_re_000");
  EXPECT_EQ(h[13 + 299], "cir_re_299");
  EXPECT_EQ(h[313], "cir_im_000");
  EXPECT_EQ(h.back(), "domain");
}

TEST(DatasetIo, MissingFileRejected) {
  EXPECT_THROW(load_dataset(scratch_dir("missing") / "nope"), DatasetError);
}

TEST(DatasetIo, WrongColumnCountReportsRow) {
  const auto dir = scratch_dir("bad_cols");
  write_dataset(grid_set(1, 3), dir);
  auto text = read_file(dir / "data.csv");
  // Drop the last column of the third data row.
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) pos = text.find('\n', pos) + 1;
  const std::size_t comma = text.rfind(',', pos - 2);
  text.erase(comma, pos - 1 - comma);
  write_file(dir / "data.csv", text);
  try {
    load_dataset(dir);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    ASSERT_TRUE(e.row().has_value());
    EXPECT_EQ(*e.row(), 2u);
  }
}

TEST(DatasetIo, NonFiniteCoordinatesReportRow) {
  const auto dir = scratch_dir("nan_coord");
  write_dataset(grid_set(1, 3), dir);
  patch_field(dir / "data.csv", 1, static_cast<int>(dataset_header().size()) - 3, "nan");
  try {
    load_dataset(dir);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    ASSERT_TRUE(e.row().has_value());
    EXPECT_EQ(*e.row(), 1u);
  }
}

TEST(DatasetIo, MalformedNumberRejected) {
  const auto dir = scratch_dir("bad_number");
  write_dataset(grid_set(1, 2), dir);
  patch_field(dir / "data.csv", 0, 5, "abc");
  EXPECT_THROW(load_dataset(dir), DatasetError);
}

TEST(DatasetValidate, DuplicateIdsRejected) {
  auto set = grid_set(1, 2);
  set.samples[1].sample_id = set.samples[0].sample_id;
  EXPECT_THROW(set.validate(), DatasetError);
}

TEST(Split, SinglePositionSizes) {
  const auto s = split(grid_set(1, 100), {0.7, 0.15, 0.15}, 0);
  EXPECT_EQ(s.train.size(), 70u);
  EXPECT_EQ(s.val.size(), 15u);
  EXPECT_EQ(s.test.size(), 15u);
}

TEST(Split, AllTrain) {
  const auto s = split(grid_set(4, 10), {1.0, 0.0, 0.0}, 3);
  EXPECT_EQ(s.train.size(), 40u);
  EXPECT_TRUE(s.val.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(Split, DisjointAndCovering) {
  const auto set = grid_set(7, 13);
  const auto s = split(set, {}, 5);
  std::vector<int> seen(set.size(), 0);
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (auto i : *part) ++seen[i];
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(Split, SeedChangesPermutationNotSizes) {
  const auto set = grid_set(52, 20);
  const auto a = split(set, {0.7, 0.15, 0.15}, 0);
  const auto b = split(set, {0.7, 0.15, 0.15}, 1);
  EXPECT_NE(a.train, b.train);
  auto per_pos = [&](const std::vector<std::size_t>& idx) {
    std::map<int, int> m;
    for (auto i : idx) ++m[set.samples[i].position_id];
    return m;
  };
  EXPECT_EQ(per_pos(a.train), per_pos(b.train));
  EXPECT_EQ(per_pos(a.val), per_pos(b.val));
  EXPECT_EQ(per_pos(a.test), per_pos(b.test));
  for (const auto& [pos, n] : per_pos(a.train)) {
    EXPECT_EQ(n, 14) << pos;
    EXPECT_LE(std::abs(n / 20.0 - 0.7), 1.0 / 20.0);
  }
}

TEST(Split, StratificationBoundHoldsForOddSizes) {
  SampleSet set;
  std::int64_t id = 0;
  for (int p = 0; p < 9; ++p)
    for (int r = 0; r < 3 + p; ++r) {
      CirSample s;
      s.sample_id = id++;
      s.position_id = p;
      set.samples.push_back(s);
    }
  const auto s = split(set, {}, 2);
  std::map<int, int> total, train;
  for (const auto& smp : set.samples) ++total[smp.position_id];
  for (auto i : s.train) ++train[set.samples[i].position_id];
  for (const auto& [pos, n] : total)
    EXPECT_LE(std::abs(static_cast<double>(train[pos]) / n - 0.7), 1.0 / n) << pos;
}

TEST(Split, Deterministic) {
  const auto set = grid_set(5, 11);
  const auto a = split(set, {}, 4), b = split(set, {}, 4);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
}

TEST(Split, Errors) {
  EXPECT_THROW(split(grid_set(1, 10), {0.5, 0.2, 0.2}, 0), std::invalid_argument);
  EXPECT_THROW(split(grid_set(3, 2), {0.7, 0.15, 0.15}, 0), std::invalid_argument);
}

TEST(Split, FileRoundTrip) {
  const auto s = split(grid_set(3, 10), {}, 8);
  const auto file = scratch_dir("splits") / "splits.json";
  write_splits(s, file);
  const auto back = load_splits(file);
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.val, s.val);
  EXPECT_EQ(back.test, s.test);
  EXPECT_EQ(back.seed, 8u);
}

TEST(Holdout, StratifiedCount) {
  const auto set = grid_set(8, 25);
  const auto [rest, held] = stratified_holdout(set, 40, 1);
  EXPECT_EQ(held.size(), 40u);
  EXPECT_EQ(rest.size(), 160u);
  std::map<int, int> per;
  for (auto i : held) ++per[set.samples[i].position_id];
  for (const auto& [p, n] : per) EXPECT_EQ(n, 5);
}

TEST(Synth, Deterministic) {
  const auto preset = benchmark_preset(3);
  const auto a = synth_generate(preset.source, 7), b = synth_generate(preset.source, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.samples[i], b.samples[i]);
  const auto c = synth_generate(preset.source, 8);
  EXPECT_NE(a.samples[0].cir, c.samples[0].cir);
}

TEST(Synth, SampleCount) {
  SynthConfig cfg;
  cfg.jammer_positions = grid_positions(300, 500, 4, 13, 30, 30);
  cfg.samples_per_position = 100;
  ASSERT_EQ(cfg.jammer_positions.size(), 52u);
  const auto set = synth_generate(cfg, 1);
  EXPECT_EQ(set.size(), 20800u);
  set.validate();
  for (const auto& s : set.samples) {
    EXPECT_GE(s.x_cm, 0.0);
    EXPECT_LE(s.x_cm, 300.0);
    EXPECT_GE(s.y_cm, 0.0);
    EXPECT_LE(s.y_cm, 500.0);
  }
}

TEST(Synth, PresetSizes) {
  const auto p = benchmark_preset(2);
  EXPECT_EQ(p.source.jammer_positions.size(), 16u);
  EXPECT_EQ(p.target.jammer_positions.size(), 8u);
  EXPECT_EQ(p.target.domain, Domain::target);
  EXPECT_GT(p.target.clutter_taps, 0);
}

// The strongest tap follows the direct-path delay computed from geometry.
TEST(Synth, PeakTapFollowsDistance) {
  SynthConfig cfg;
  cfg.jammer_positions = {{50, 50}, {100, 100}, {150, 170}, {200, 250}, {250, 400}};
  cfg.samples_per_position = 4;
  const auto set = synth_generate(cfg, 3);
  for (int rx = 0; rx < 4; ++rx) {
    std::vector<std::pair<double, int>> by_dist;  // (geometric delay, observed peak)
    for (const auto& s : set.samples) {
      if (s.receiver_id != rx) continue;
      int peak = 0;
      for (int t = 1; t < kCirTaps; ++t)
        if (std::abs(s.cir[t]) > std::abs(s.cir[peak])) peak = t;
      const double delay = direct_delay_taps(cfg, {s.x_cm, s.y_cm}, rx);
      EXPECT_LE(std::abs(peak - delay), 1.0) << "rx " << rx;
      by_dist.push_back({delay, peak});
    }
    std::sort(by_dist.begin(), by_dist.end());
    for (std::size_t i = 1; i < by_dist.size(); ++i)
      if (by_dist[i].first - by_dist[i - 1].first > 1.5)
        EXPECT_GE(by_dist[i].second, by_dist[i - 1].second);
  }
}

TEST(Synth, Errors) {
  SynthConfig cfg;
  cfg.jammer_positions = {{400, 50}};
  EXPECT_THROW(synth_generate(cfg, 0), std::invalid_argument);
  cfg.jammer_positions = {{100, 50}};
  cfg.samples_per_position = 0;
  EXPECT_THROW(synth_generate(cfg, 0), std::invalid_argument);
}
