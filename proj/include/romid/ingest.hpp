// Copyright 2026 The romid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ROM tree inventory and printable-string extraction.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace romid {

namespace fs = std::filesystem;

inline constexpr std::size_t kDefaultMinStringLength = 4;

struct IngestConfig {
  std::size_t min_string_length = kDefaultMinStringLength;
  // "sys." is a known vendor prefix but is not enabled unless asked for.
  std::vector<std::string> property_prefixes = {"ro.", "persist.", "vendor."};
};

// Inventory of one unpacked ROM. All paths are absolute; use relative_path()
// for anything that ends up in a report.
struct RomDescriptor {
  fs::path root_path;
  std::string brand;
  std::string model;
  int sdk_version = 0;  // 0 = unknown
  std::vector<fs::path> code_units;
  std::vector<fs::path> context_files;
  std::vector<fs::path> policy_files;
  std::optional<fs::path> framework_unit;
  std::optional<fs::path> build_prop_path;
  // Regular files outside code units, context files and policy files. These
  // feed the ROM-wide string index.
  std::vector<fs::path> other_files;

  // Path relative to root_path, '/'-separated, with a leading '/'.
  std::string relative_path(const fs::path& p) const;
};

struct BinaryStringHit {
  fs::path file_path;
  std::uint64_t offset = 0;
  std::string text;
  bool property_like = false;

  friend bool operator==(const BinaryStringHit&, const BinaryStringHit&) = default;
};

// Throws IngestError when root is missing or not a directory.
RomDescriptor classify_rom(const fs::path& root, std::string brand, std::string model);

// Value of ro.build.version.sdk, or 0 when absent or malformed.
int read_sdk_version(std::string_view build_prop_text);

bool is_property_like(std::string_view text, const IngestConfig& config);

// Maximal runs of printable ASCII (0x20-0x7E) of at least config.min_string_length.
std::vector<BinaryStringHit> extract_binary_strings(std::span<const std::uint8_t> bytes,
                                                    const fs::path& label,
                                                    const IngestConfig& config = {});
// Throws IngestError when the file cannot be read.
std::vector<BinaryStringHit> extract_binary_strings(const fs::path& file,
                                                    const IngestConfig& config = {});

// Deduplicated, lexicographically sorted texts of property-like hits.
std::vector<std::string> scan_property_like_names(std::span<const BinaryStringHit> hits,
                                                  const IngestConfig& config = {});

// Reads a whole file; throws IngestError.
std::string read_file(const fs::path& file);

}  // namespace romid
