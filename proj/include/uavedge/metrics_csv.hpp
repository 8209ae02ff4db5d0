#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uavedge/train.hpp"

namespace uavedge {

// Metrics CSV schema v1. The header row is fixed; numbers are written as
// shortest round-trip decimals so identical runs give identical bytes.
inline constexpr std::string_view kMetricsHeader =
    "episode,total_reward,steps,overflow_count,energy_used,epsilon,mean_loss";

std::string metrics_row(const EpisodeRecord& r);

void write_metrics_csv(std::ostream& out, std::span<const EpisodeRecord> records);
void save_metrics_csv(const std::filesystem::path& path, std::span<const EpisodeRecord> records);

// Throws CsvError with the offending row/column.
std::vector<EpisodeRecord> read_metrics_csv(std::istream& in);
std::vector<EpisodeRecord> load_metrics_csv(const std::filesystem::path& path);

}  // namespace uavedge
