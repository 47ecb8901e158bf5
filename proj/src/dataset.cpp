#include "jamloc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace jamloc {
namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Domain d) { return d == Domain::source ? "source" : "target"; }
std::string to_string(Provenance p) { return p == Provenance::real ? "real" : "synthetic"; }

Domain domain_from_string(const std::string& s) {
  if (s == "source") return Domain::source;
  if (s == "target") return Domain::target;
  throw DatasetError("unknown domain '" + s + "'");
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "real") return Provenance::real;
  if (s == "synthetic") return Provenance::synthetic;
  throw DatasetError("unknown provenance '" + s + "'");
}

void SampleSet::validate() const {
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!ids.insert(s.sample_id).second)
      throw DatasetError("duplicate sample_id " + std::to_string(s.sample_id), i);
    if (s.cir.size() != static_cast<std::size_t>(kCirTaps))
      throw DatasetError("cir must have " + std::to_string(kCirTaps) + " taps", i);
    if (s.receiver_id < 0 || s.receiver_id > 3)
      throw DatasetError("receiver_id outside 0..3", i);
    if (!std::isfinite(s.x_cm) || !std::isfinite(s.y_cm))
      throw DatasetError("non-finite ground-truth coordinates", i);
  }
}

SampleSet SampleSet::subset(const std::vector<std::size_t>& indices) const {
  SampleSet out;
  out.provenance = provenance;
  out.domain = domain;
  out.seed = seed;
  out.samples.reserve(indices.size());
  for (auto i : indices) out.samples.push_back(samples.at(i));
  return out;
}

std::vector<std::string> dataset_header() {
  std::vector<std::string> h{"sample_id", "receiver_id"};
  for (auto n : kDiagnosticNames) h.emplace_back(n);
  char buf[16];
  for (int t = 0; t < kCirTaps; ++t) {
    std::snprintf(buf, sizeof buf, "cir_re_%03d", t);
    h.emplace_back(buf);
  }
  for (int t = 0; t < kCirTaps; ++t) {
    std::snprintf(buf, sizeof buf, "cir_im_%03d", t);
    h.emplace_back(buf);
  }
  for (const char* n : {"position_id", "x_cm", "y_cm", "domain"}) h.emplace_back(n);
  return h;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

void append_number(std::string& out, std::int64_t v) {
  char buf[24];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename N>
N parse_number(std::string_view field, std::size_t row, const char* column) {
  N v{};
  auto r = std::from_chars(field.data(), field.data() + field.size(), v);
  if (r.ec != std::errc() || r.ptr != field.data() + field.size())
    throw DatasetError("cannot parse " + std::string(column) + " value '" +
                           std::string(field) + "'",
                       row);
  return v;
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DatasetError("missing file " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetError("malformed JSON in " + file.string() + ": " + e.what());
  }
}

}  // namespace

void write_dataset(const SampleSet& set, const fs::path& dir) {
  set.validate();
  fs::create_directories(dir);
  json manifest = {
      {"schema_version", kDatasetSchemaVersion},
      {"domain", to_string(set.domain)},
      {"provenance", to_string(set.provenance)},
      {"seed", set.seed ? json(*set.seed) : json(nullptr)},
      {"sample_count", set.samples.size()},
      {"cir_taps", kCirTaps},
  };
  {
    std::ofstream m(dir / "manifest.json", std::ios::binary);
    m << manifest.dump(2) << '\n';
  }
  std::ofstream out(dir / "data.csv", std::ios::binary);
  if (!out) throw DatasetError("cannot write " + (dir / "data.csv").string());
  const auto header = dataset_header();
  std::string line;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) line += ',';
    line += header[i];
  }
  line += '\n';
  out << line;
  for (const auto& s : set.samples) {
    line.clear();
    append_number(line, s.sample_id);
    line += ',';
    append_number(line, static_cast<std::int64_t>(s.receiver_id));
    for (double d : s.diagnostics) {
      line += ',';
      append_number(line, d);
    }
    for (const auto& c : s.cir) {
      line += ',';
      append_number(line, c.real());
    }
    for (const auto& c : s.cir) {
      line += ',';
      append_number(line, c.imag());
    }
    line += ',';
    append_number(line, static_cast<std::int64_t>(s.position_id));
    line += ',';
    append_number(line, s.x_cm);
    line += ',';
    append_number(line, s.y_cm);
    line += ',';
    line += to_string(s.domain);
    line += '\n';
    out << line;
  }
}

SampleSet load_dataset(const fs::path& dir) {
  const json manifest = read_json(dir / "manifest.json");
  SampleSet set;
  try {
    if (manifest.at("schema_version").get<int>() != kDatasetSchemaVersion)
      throw DatasetError("unsupported dataset schema version");
    set.domain = domain_from_string(manifest.at("domain").get<std::string>());
    set.provenance = provenance_from_string(manifest.at("provenance").get<std::string>());
    if (manifest.contains("seed") && !manifest.at("seed").is_null())
      set.seed = manifest.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DatasetError(std::string("bad manifest: ") + e.what());
  }

  std::ifstream in(dir / "data.csv", std::ios::binary);
  if (!in) throw DatasetError("missing file " + (dir / "data.csv").string());
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("empty data.csv");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto expected = dataset_header();
  {
    const auto fields = split_fields(line);
    if (fields.size() != expected.size())
      throw DatasetError("schema mismatch: header has " + std::to_string(fields.size()) +
                         " columns, expected " + std::to_string(expected.size()));
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i] != expected[i])
        throw DatasetError("schema mismatch: column " + std::to_string(i) + " is '" +
                           std::string(fields[i]) + "', expected '" + expected[i] + "'");
  }

  const std::size_t diag0 = 2;
  const std::size_t re0 = diag0 + kNumDiagnostics;
  const std::size_t im0 = re0 + kCirTaps;
  const std::size_t tail = im0 + kCirTaps;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      ++row;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != expected.size())
      throw DatasetError("schema mismatch: " + std::to_string(f.size()) + " columns, expected " +
                             std::to_string(expected.size()),
                         row);
    CirSample s;
    s.sample_id = parse_number<std::int64_t>(f[0], row, "sample_id");
    s.receiver_id = parse_number<int>(f[1], row, "receiver_id");
    for (int k = 0; k < kNumDiagnostics; ++k)
      s.diagnostics[k] = parse_number<double>(f[diag0 + k], row, "diagnostic");
    for (int t = 0; t < kCirTaps; ++t)
      s.cir[t] = {parse_number<double>(f[re0 + t], row, "cir_re"),
                  parse_number<double>(f[im0 + t], row, "cir_im")};
    s.position_id = parse_number<int>(f[tail], row, "position_id");
    s.x_cm = parse_number<double>(f[tail + 1], row, "x_cm");
    s.y_cm = parse_number<double>(f[tail + 2], row, "y_cm");
    if (!std::isfinite(s.x_cm) || !std::isfinite(s.y_cm))
      throw DatasetError("non-finite ground-truth coordinates", row);
    s.domain = domain_from_string(std::string(f[tail + 3]));
    set.samples.push_back(std::move(s));
    ++row;
  }
  if (manifest.contains("sample_count") &&
      manifest.at("sample_count").get<std::size_t>() != set.samples.size())
    throw DatasetError("manifest sample_count " +
                       std::to_string(manifest.at("sample_count").get<std::size_t>()) +
                       " disagrees with " + std::to_string(set.samples.size()) + " rows");
  set.validate();
  return set;
}

namespace {

std::map<int, std::vector<std::size_t>> by_position(const SampleSet& set) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < set.samples.size(); ++i)
    groups[set.samples[i].position_id].push_back(i);
  return groups;
}

// Largest-remainder apportionment of n items to the given weights.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double exact = static_cast<double>(n) * weights[k] / total;
    counts[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    used += counts[k];
    rem.push_back({exact - static_cast<double>(counts[k]), k});
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++counts[rem[k % rem.size()].second];
  return counts;
}

}  // namespace

Splits split(const SampleSet& set, const SplitRatios& ratios, std::uint64_t seed) {
  const std::vector<double> r{ratios.train, ratios.val, ratios.test};
  for (double v : r)
    if (!(v >= 0.0)) throw std::invalid_argument("split ratios must be non-negative");
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1");
  std::size_t nonempty = 0;
  for (double v : r) nonempty += v > 0.0 ? 1 : 0;

  Splits out;
  out.seed = seed;
  out.strategy = "stratified:position_id;ratios=" + std::to_string(r[0]) + "," +
                 std::to_string(r[1]) + "," + std::to_string(r[2]);
  std::mt19937_64 rng(seed);
  for (auto& [pos, idx] : by_position(set)) {
    if (idx.size() < nonempty)
      throw std::invalid_argument("position " + std::to_string(pos) + " has " +
                                  std::to_string(idx.size()) + " samples, fewer than " +
                                  std::to_string(nonempty) + " partitions");
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto counts = apportion(idx.size(), r);
    auto it = idx.begin();
    out.train.insert(out.train.end(), it, it + counts[0]);
    it += counts[0];
    out.val.insert(out.val.end(), it, it + counts[1]);
    it += counts[1];
    out.test.insert(out.test.end(), it, idx.end());
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(
    const SampleSet& set, std::size_t count, std::uint64_t seed) {
  if (count > set.size())
    throw std::invalid_argument("hold-out of " + std::to_string(count) + " exceeds " +
                                std::to_string(set.size()) + " samples");
  auto groups = by_position(set);
  std::vector<double> sizes;
  for (const auto& [pos, idx] : groups) sizes.push_back(static_cast<double>(idx.size()));
  const auto take = apportion(count, sizes);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> rest, held;
  std::size_t k = 0;
  for (auto& [pos, idx] : groups) {
    std::shuffle(idx.begin(), idx.end(), rng);
    held.insert(held.end(), idx.begin(), idx.begin() + take[k]);
    rest.insert(rest.end(), idx.begin() + take[k], idx.end());
    ++k;
  }
  return {rest, held};
}

void write_splits(const Splits& s, const fs::path& file) {
  json j = {{"schema_version", 1}, {"strategy", s.strategy}, {"seed", s.seed},
            {"train", s.train},    {"val", s.val},           {"test", s.test}};
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream(file, std::ios::binary) << j.dump(2) << '\n';
}

Splits load_splits(const fs::path& file) {
  const json j = read_json(file);
  Splits s;
  try {
    s.strategy = j.at("strategy").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.val = j.at("val").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw DatasetError(std::string("bad splits file: ") + e.what());
  }
  return s;
}

}  // namespace jamloc
