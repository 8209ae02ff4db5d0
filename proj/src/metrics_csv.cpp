#include "uavedge/metrics_csv.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "uavedge/errors.hpp"
#include "uavedge/format.hpp"

namespace uavedge {

namespace {

constexpr std::size_t kColumns = 7;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

int parse_int_field(std::string_view text, std::size_t row, std::size_t col) {
  const std::optional<double> v = parse_double(text);
  if (!v || !std::isfinite(*v) || *v != std::floor(*v) || std::fabs(*v) > 2147483647.0) {
    throw CsvError(row, col, "expected an integer, got '" + std::string(text) + "'");
  }
  return static_cast<int>(*v);
}

double parse_real_field(std::string_view text, std::size_t row, std::size_t col) {
  const std::optional<double> v = parse_double(text);
  if (!v) throw CsvError(row, col, "expected a number, got '" + std::string(text) + "'");
  return *v;
}

}  // namespace

std::string metrics_row(const EpisodeRecord& r) {
  std::string line = std::to_string(r.episode);
  line += ',' + format_double(r.total_reward);
  line += ',' + std::to_string(r.steps);
  line += ',' + std::to_string(r.overflow_count);
  line += ',' + format_double(r.energy_used);
  line += ',' + format_double(r.epsilon);
  line += ',' + format_double(r.mean_loss);
  return line;
}

void write_metrics_csv(std::ostream& out, std::span<const EpisodeRecord> records) {
  out << kMetricsHeader << '\n';
  for (const EpisodeRecord& r : records) out << metrics_row(r) << '\n';
}

void save_metrics_csv(const std::filesystem::path& path, std::span<const EpisodeRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_metrics_csv(out, records);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<EpisodeRecord> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, 1, "empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) {
    throw CsvError(1, 1, "header must be exactly '" + std::string(kMetricsHeader) + "'");
  }

  std::vector<EpisodeRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string_view> f = split_fields(line);
    if (f.size() != kColumns) {
      throw CsvError(row, f.size() < kColumns ? f.size() + 1 : kColumns + 1,
                     "expected " + std::to_string(kColumns) + " fields, got " +
                         std::to_string(f.size()));
    }
    EpisodeRecord r;
    r.episode = parse_int_field(f[0], row, 1);
    r.total_reward = parse_real_field(f[1], row, 2);
    r.steps = parse_int_field(f[2], row, 3);
    r.overflow_count = parse_int_field(f[3], row, 4);
    r.energy_used = parse_real_field(f[4], row, 5);
    r.epsilon = parse_real_field(f[5], row, 6);
    r.mean_loss = parse_real_field(f[6], row, 7);
    records.push_back(r);
  }
  return records;
}

std::vector<EpisodeRecord> load_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  return read_metrics_csv(in);
}

}  // namespace uavedge
