#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jamloc {

inline constexpr int kCirTaps = 300;
inline constexpr int kNumDiagnostics = 11;
inline constexpr int kDatasetSchemaVersion = 1;

// Order of the diagnostic vector and of the CSV columns.
inline constexpr std::array<std::string_view, kNumDiagnostics> kDiagnosticNames = {
    "PHE",  "RSL",        "CRCG",        "CRCB",     "PREJ",     "RSSI",
    "IpatovPeak", "IpatovPower", "IpatovF1", "IpatovF2", "IpatovF3"};

enum class Domain { source, target };
enum class Provenance { real, synthetic };

std::string to_string(Domain d);
std::string to_string(Provenance p);
Domain domain_from_string(const std::string& s);
Provenance provenance_from_string(const std::string& s);

// One receiver's reception event.
struct CirSample {
  std::int64_t sample_id = 0;
  int receiver_id = 0;  // 0..3
  std::array<double, kNumDiagnostics> diagnostics{};
  std::vector<std::complex<double>> cir = std::vector<std::complex<double>>(kCirTaps);
  int position_id = 0;
  double x_cm = 0.0;
  double y_cm = 0.0;
  Domain domain = Domain::source;

  bool operator==(const CirSample&) const = default;
};

struct SampleSet {
  std::vector<CirSample> samples;
  Provenance provenance = Provenance::synthetic;
  Domain domain = Domain::source;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return samples.size(); }
  // Throws DatasetError on duplicate ids or malformed samples.
  void validate() const;
  SampleSet subset(const std::vector<std::size_t>& indices) const;
};

struct Splits {
  std::vector<std::size_t> train, val, test;
  std::string strategy;
  std::uint64_t seed = 0;
};

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(const std::string& what, std::optional<std::size_t> row = std::nullopt)
      : std::runtime_error(row ? what + " (row " + std::to_string(*row) + ")" : what),
        row_(row) {}
  std::optional<std::size_t> row() const { return row_; }

 private:
  std::optional<std::size_t> row_;
};

// Canonical on-disk form: <dir>/manifest.json + <dir>/data.csv.
SampleSet load_dataset(const std::filesystem::path& dir);
void write_dataset(const SampleSet& set, const std::filesystem::path& dir);
std::vector<std::string> dataset_header();

// Stratified by position_id; each position's shuffled indices are cut with
// largest-remainder rounding of the ratios.
Splits split(const SampleSet& set, const SplitRatios& ratios, std::uint64_t seed);

// Reserves `count` indices stratified by position (largest-remainder
// allocation). Returns {remaining, held_out}.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(
    const SampleSet& set, std::size_t count, std::uint64_t seed);

void write_splits(const Splits& s, const std::filesystem::path& file);
Splits load_splits(const std::filesystem::path& file);

}  // namespace jamloc
