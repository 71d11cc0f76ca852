#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oamfso/propagation.hpp"

namespace oamfso::cli {

// Channel configuration plus run parameters, read from "key = value" text.
struct CampaignConfig {
  ChannelConfig channel;
  std::size_t n_realizations = 1000;
  std::uint64_t master_seed = 1;
  std::filesystem::path output;  // sample store; empty means <data dir>/<name>.store
};

// Throws ConfigError naming the source and line on any problem.
CampaignConfig parse_config(std::istream& in, const std::string& source);
CampaignConfig load_config(const std::filesystem::path& path);

// OAMFSO_DATA_DIR, or ./data when unset.
std::filesystem::path data_dir();

// Relative paths that do not exist as given are looked up in the data dir.
std::filesystem::path resolve_input(const std::filesystem::path& p);

std::vector<int> parse_int_list(const std::string& text);
// "a:b:step" (inclusive) or "v1,v2,...".
std::vector<double> parse_grid(const std::string& text);

}  // namespace oamfso::cli
