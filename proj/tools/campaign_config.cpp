#include "campaign_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "oamfso/errors.hpp"

namespace oamfso::cli {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out))
    throw std::invalid_argument("not a number: '" + v + "'");
  return out;
}

template <class Int>
Int to_int(const std::string& v) {
  Int out = 0;
  const char* begin = v.data();
  if (!v.empty() && v[0] == '+') ++begin;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end || begin == end)
    throw std::invalid_argument("not an integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw std::invalid_argument("not a boolean: '" + v + "'");
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int<int>(trim(item)));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string a, b, step;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    std::getline(ss, step, ':');
    const double lo = to_double(trim(a));
    const double hi = to_double(trim(b));
    const double st = to_double(trim(step));
    if (!(st > 0.0) || hi < lo) throw ConfigError("bad grid '" + text + "'");
    const auto n = static_cast<long>(std::floor((hi - lo) / st + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + st * static_cast<double>(i));
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("bad grid '" + text + "': " + e.what());
  }
  if (out.empty()) throw ConfigError("empty grid");
  return out;
}

CampaignConfig parse_config(std::istream& in, const std::string& source) {
  CampaignConfig cfg;
  auto& ch = cfg.channel;
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"wavelength", [&](const std::string& v) { ch.lambda = to_double(v); }},
      {"beam_waist", [&](const std::string& v) { ch.w0 = to_double(v); }},
      {"distance", [&](const std::string& v) { ch.z_total = to_double(v); }},
      {"screens", [&](const std::string& v) { ch.n_screens = to_int<int>(v); }},
      {"grid_points", [&](const std::string& v) { ch.grid.n_points = to_int<int>(v); }},
      {"grid_spacing", [&](const std::string& v) { ch.grid.dx = to_double(v); }},
      {"cn2", [&](const std::string& v) { ch.turbulence.cn2 = to_double(v); }},
      {"inner_scale", [&](const std::string& v) { ch.turbulence.inner_scale = to_double(v); }},
      {"screen_gain", [&](const std::string& v) { ch.turbulence.screen_gain = to_double(v); }},
      {"outer_scale", [&](const std::string& v) { ch.turbulence.outer_scale = to_double(v); }},
      {"tx_modes", [&](const std::string& v) { ch.tx_modes = ModeSet(parse_int_list(v)); }},
      {"rx_modes", [&](const std::string& v) { ch.rx_modes = ModeSet(parse_int_list(v)); }},
      {"absorber", [&](const std::string& v) { ch.absorber = to_bool(v); }},
      {"realizations", [&](const std::string& v) { cfg.n_realizations = to_int<std::size_t>(v); }},
      {"seed", [&](const std::string& v) { cfg.master_seed = to_int<std::uint64_t>(v); }},
      {"output", [&](const std::string& v) { cfg.output = v; }},
  };
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) fail("unknown key '" + key + "'");
    if (!seen.insert(key).second) fail("duplicate key '" + key + "'");
    if (value.empty()) fail("missing value for '" + key + "'");
    try {
      it->second(value);
    } catch (const std::invalid_argument& e) {
      fail(key + ": " + e.what());
    }
  }
  if (cfg.n_realizations == 0) throw ConfigError(source + ": realizations must be positive");
  try {
    ch.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  const auto resolved = resolve_input(path);
  std::ifstream in(resolved);
  if (!in) throw MissingInputError("cannot open config " + path.string());
  auto cfg = parse_config(in, resolved.string());
  if (cfg.output.empty())
    cfg.output = data_dir() / (resolved.stem().string() + ".store");
  else if (cfg.output.is_relative())
    cfg.output = data_dir() / cfg.output;
  return cfg;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("OAMFSO_DATA_DIR"); env && *env) return env;
  return "data";
}

std::filesystem::path resolve_input(const std::filesystem::path& p) {
  if (std::filesystem::exists(p) || p.is_absolute()) return p;
  const auto alt = data_dir() / p;
  if (std::filesystem::exists(alt)) return alt;
  return p;
}

}  // namespace oamfso::cli
