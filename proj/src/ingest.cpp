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

#include "romid/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "romid/diagnostics.hpp"

namespace romid {

namespace {

constexpr std::string_view kSdkKey = "ro.build.version.sdk";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// apktool / baksmali output directories.
bool is_code_unit_dir_name(std::string_view name) {
  return ends_with(name, ".out") || ends_with(name, ".smali");
}

bool is_framework_name(std::string_view name) {
  return name == "framework" || name.starts_with("framework.");
}

bool has_smali(const fs::path& dir) {
  std::error_code ec;
  for (fs::recursive_directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec),
       end;
       it != end; it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file(ec) && it->path().extension() == ".smali") return true;
  }
  return false;
}

}  // namespace

std::string RomDescriptor::relative_path(const fs::path& p) const {
  fs::path rel = p.lexically_relative(root_path);
  if (rel.empty() || *rel.begin() == "..") rel = p;
  std::string out = rel.generic_string();
  if (out == ".") return "/";
  if (!out.starts_with('/')) out.insert(out.begin(), '/');
  return out;
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IngestError(file.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IngestError(file.string(), "read failed");
  return std::move(buf).str();
}

int read_sdk_version(std::string_view text) {
  int found = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    if (trim(line.substr(0, eq)) != kSdkKey) continue;
    std::string_view value = trim(line.substr(eq + 1));
    int parsed = 0;
    auto [ptr, err] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    // Later assignments override earlier ones, as in the property loader.
    found = (err == std::errc{} && ptr == value.data() + value.size() && parsed >= 1) ? parsed : 0;
  }
  return found;
}

RomDescriptor classify_rom(const fs::path& root, std::string brand, std::string model) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IngestError(root.string(), "not a readable directory");

  RomDescriptor d;
  d.root_path = fs::absolute(root, ec).lexically_normal();
  d.brand = std::move(brand);
  d.model = std::move(model);

  std::vector<fs::path> entries;
  std::set<fs::path> units;
  fs::recursive_directory_iterator it(d.root_path, fs::directory_options::skip_permission_denied,
                                      ec);
  if (ec) throw IngestError(root.string(), "cannot list directory: " + ec.message());
  for (fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) throw IngestError(root.string(), "walk failed: " + ec.message());
    const fs::path& p = it->path();
    if (it->is_directory(ec)) {
      if (is_code_unit_dir_name(p.filename().string()) && has_smali(p)) {
        units.insert(p);
        it.disable_recursion_pending();
      }
      continue;
    }
    if (it->is_regular_file(ec)) entries.push_back(p);
  }
  std::sort(entries.begin(), entries.end());

  std::vector<fs::path> build_props;
  for (const fs::path& p : entries) {
    std::string name = p.filename().string();
    if (p.extension() == ".smali") {
      // Loose smali outside a recognised output directory: group by parent.
      units.insert(p.parent_path());
    } else if (ends_with(name, "property_contexts")) {
      d.context_files.push_back(p);
    } else if (ends_with(name, ".cil") || ends_with(name, ".rules")) {
      d.policy_files.push_back(p);
    } else {
      if (name == "build.prop") build_props.push_back(p);
      d.other_files.push_back(p);
    }
  }
  d.code_units.assign(units.begin(), units.end());
  for (const fs::path& u : d.code_units) {
    if (is_framework_name(u.filename().string())) {
      d.framework_unit = u;
      break;
    }
  }

  // Prefer the first build.prop (path order) that actually carries the SDK key.
  for (const fs::path& p : build_props) {
    int sdk = read_sdk_version(read_file(p));
    if (!d.build_prop_path) d.build_prop_path = p;
    if (sdk > 0) {
      d.build_prop_path = p;
      d.sdk_version = sdk;
      break;
    }
  }
  return d;
}

bool is_property_like(std::string_view text, const IngestConfig& config) {
  return std::any_of(config.property_prefixes.begin(), config.property_prefixes.end(),
                     [&](const std::string& prefix) { return text.starts_with(prefix); });
}

std::vector<BinaryStringHit> extract_binary_strings(std::span<const std::uint8_t> bytes,
                                                    const fs::path& label,
                                                    const IngestConfig& config) {
  const std::size_t min_len = std::max<std::size_t>(1, config.min_string_length);
  std::vector<BinaryStringHit> hits;
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    if (bytes[i] < 0x20 || bytes[i] > 0x7E) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < n && bytes[i] >= 0x20 && bytes[i] <= 0x7E) ++i;
    if (i - start >= min_len) {
      BinaryStringHit hit;
      hit.file_path = label;
      hit.offset = start;
      hit.text.assign(reinterpret_cast<const char*>(bytes.data() + start), i - start);
      hit.property_like = is_property_like(hit.text, config);
      hits.push_back(std::move(hit));
    }
  }
  return hits;
}

std::vector<BinaryStringHit> extract_binary_strings(const fs::path& file,
                                                    const IngestConfig& config) {
  std::string data = read_file(file);
  return extract_binary_strings(
      std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()), file, config);
}

std::vector<std::string> scan_property_like_names(std::span<const BinaryStringHit> hits,
                                                  const IngestConfig& config) {
  std::set<std::string> names;
  for (const BinaryStringHit& h : hits) {
    if (is_property_like(h.text, config)) names.insert(h.text);
  }
  return {names.begin(), names.end()};
}

}  // namespace romid
