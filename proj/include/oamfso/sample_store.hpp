#pragma once

#include <filesystem>
#include <iosfwd>

#include "oamfso/propagation.hpp"

namespace oamfso::store {

// Text store:
//   oam-irradiance v1
//   digest <hex>
//   # oamfso <version>
//   realization_index, m, n, I_value
//   ...
// Values use the shortest round-trip decimal representation.
void write(std::ostream& out, const IrradianceSampleSet& samples);
void write(const std::filesystem::path& path,
           const IrradianceSampleSet& samples);

// Appends rows to an existing store. Throws ConfigError when the digests
// differ.
void append(const std::filesystem::path& path,
            const IrradianceSampleSet& samples);

IrradianceSampleSet read(std::istream& in);
IrradianceSampleSet read(const std::filesystem::path& path);

}  // namespace oamfso::store
