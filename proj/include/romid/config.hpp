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

#pragma once

#include <filesystem>
#include <string>

#include "romid/filter.hpp"
#include "romid/ingest.hpp"
#include "romid/selinux.hpp"
#include "romid/service.hpp"
#include "romid/usage.hpp"

namespace romid {

struct ScanConfig {
  IngestConfig ingest;
  UsageConfig usage;
  KeywordConfig keywords = KeywordConfig::defaults();
  CorroborationConfig corroboration;
  BrandMarkers brand_markers = default_brand_markers();
  ServiceConfig service;
  AccessOptions access;
  unsigned threads = 1;
};

// Keys absent from the JSON keep their defaults. Throws ConfigError on
// unknown keys, wrong types or invalid keyword tables.
ScanConfig config_from_json(const std::string& text);
ScanConfig load_config(const std::filesystem::path& file);
// Canonical JSON of every setting, as accepted by config_from_json.
std::string config_to_json(const ScanConfig& config);

}  // namespace romid
