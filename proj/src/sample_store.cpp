#include "oamfso/sample_store.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "oamfso/errors.hpp"

namespace oamfso::store {

namespace {

constexpr std::string_view kHeader = "oam-irradiance v1";

void write_rows(std::ostream& out, const IrradianceSampleSet& samples) {
  const auto& idx = samples.realization_indices();
  char buf[64];
  for (std::size_t k = 0; k < idx.size(); ++k) {
    for (int m : samples.tx()) {
      for (int n : samples.rx()) {
        auto res = std::to_chars(buf, buf + sizeof buf, samples.channel(m, n)[k]);
        out << idx[k] << ", " << m << ", " << n << ", "
            << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << "\n";
      }
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_field(std::string_view text, std::size_t line) {
  text = trim(text);
  T value{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("sample store line " + std::to_string(line) +
                      ": cannot parse '" + std::string(text) + "'");
  return value;
}

}  // namespace

void write(std::ostream& out, const IrradianceSampleSet& samples) {
  out << kHeader << "\n"
      << "digest " << samples.digest() << "\n"
      << "# oamfso " << OAMFSO_VERSION << "\n";
  write_rows(out, samples);
}

void write(const std::filesystem::path& path, const IrradianceSampleSet& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MissingInputError("cannot open " + path.string() + " for writing");
  write(out, samples);
}

void append(const std::filesystem::path& path, const IrradianceSampleSet& samples) {
  std::string digest;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("cannot open sample store " + path.string());
    std::string line;
    std::getline(in, line);
    if (trim(line) != kHeader)
      throw ConfigError(path.string() + ": not an oam-irradiance v1 store");
    std::getline(in, line);
    if (line.rfind("digest ", 0) != 0)
      throw ConfigError(path.string() + ": missing digest line");
    digest = std::string(trim(std::string_view(line).substr(7)));
  }
  if (digest != samples.digest())
    throw ConfigError("refusing to append: store digest " + digest +
                      " differs from campaign digest " + samples.digest());
  std::ofstream out(path, std::ios::binary | std::ios::app);
  write_rows(out, samples);
}

IrradianceSampleSet read(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || trim(line) != kHeader)
    throw ConfigError("sample store line 1: expected '" + std::string(kHeader) + "'");
  ++line_no;
  if (!std::getline(in, line) || line.rfind("digest ", 0) != 0)
    throw ConfigError("sample store line 2: expected 'digest <hex>'");
  IrradianceSampleSet set(std::string(trim(std::string_view(line).substr(7))), {}, {});
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::string_view fields[4];
    for (int f = 0; f < 3; ++f) {
      const auto comma = view.find(',');
      if (comma == std::string_view::npos)
        throw ConfigError("sample store line " + std::to_string(line_no) +
                          ": expected 4 comma-separated fields");
      fields[f] = view.substr(0, comma);
      view.remove_prefix(comma + 1);
    }
    fields[3] = view;
    set.add_value(parse_field<std::uint64_t>(fields[0], line_no),
                  parse_field<int>(fields[1], line_no),
                  parse_field<int>(fields[2], line_no),
                  parse_field<double>(fields[3], line_no));
  }
  set.check_aligned();
  return set;
}

IrradianceSampleSet read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open sample store " + path.string());
  return read(in);
}

}  // namespace oamfso::store
