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

// System-service methods that hand sensitive property values to callers.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "romid/diagnostics.hpp"
#include "romid/filter.hpp"
#include "romid/usage.hpp"

namespace romid {

inline constexpr std::string_view kSystemServiceClass = "Lcom/android/server/SystemService;";
inline constexpr std::string_view kServiceChannelNote =
    "candidate channel, manual confirmation required";

enum class FlowKind { direct_return, via_helper_return, via_aggregate };
const char* to_string(FlowKind k);

struct ServiceLeakFinding {
  std::string service_class;
  MethodRef method;
  std::size_t candidate_index = 0;  // into the candidate list passed in
  std::string property_name;
  FlowKind flow_kind = FlowKind::direct_return;
  bool is_public = true;
  // The method also calls a Binder/Context permission check; informational.
  bool permission_check_seen = false;
};

// Class indices, in corpus order.
std::vector<int> find_service_classes(const Corpus& corpus);

struct ServiceConfig {
  int helper_depth = 2;
};

// Findings for public methods of `class_index`; non-public flows are
// reported as diagnostics. Only get-operation property candidates act as
// sources.
std::vector<ServiceLeakFinding> find_leaking_methods(const Corpus& corpus, int class_index,
                                                     std::span<const SensitiveCandidate> candidates,
                                                     Diagnostics& diags,
                                                     const ServiceConfig& config = {});

// All service classes, ordered by (class, method, candidate).
std::vector<ServiceLeakFinding> find_service_channels(const Corpus& corpus,
                                                      std::span<const SensitiveCandidate> candidates,
                                                      Diagnostics& diags,
                                                      const ServiceConfig& config = {},
                                                      unsigned threads = 1);

}  // namespace romid
