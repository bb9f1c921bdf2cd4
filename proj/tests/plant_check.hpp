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

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "oracle_vm.hpp"
#include "test_support.hpp"

namespace romid::testing {

// (class, method "name(desc)ret", instruction, kind, operation, name)
using PlantKey = std::tuple<std::string, std::string, int, std::string, std::string, std::string>;

struct PlantManifest {
  std::set<PlantKey> plants;
  std::set<std::pair<std::string, std::string>> negatives;
  nlohmann::json runs;
};

inline PlantManifest load_plants(const std::filesystem::path& file) {
  nlohmann::json j = load_json(file);
  PlantManifest m;
  for (const auto& p : j.at("plants")) {
    m.plants.insert({p.at("class").get<std::string>(), p.at("method").get<std::string>(),
                     p.at("instruction").get<int>(), p.at("kind").get<std::string>(),
                     p.at("operation").get<std::string>(), p.at("name").get<std::string>()});
  }
  for (const auto& n : j.at("negatives")) m.negatives.insert({n.at("class").get<std::string>(), n.at("method").get<std::string>()});
  m.runs = j.at("runs");
  return m;
}

inline std::string strip_owner(const std::string& method_key) {
  auto arrow = method_key.find("->");
  return arrow == std::string::npos ? method_key : method_key.substr(arrow + 2);
}

// Executes every manifest run on the concrete VM.
inline std::set<PlantKey> vm_observations(const std::vector<IrClass>& classes, const nlohmann::json& runs) {
  OracleVm vm(classes);
  for (const auto& r : runs) {
    std::vector<OracleVm::Val> args;
    for (const auto& a : r.at("args")) {
      if (a.is_string()) args.push_back(OracleVm::Val::str(a.get<std::string>()));
      else if (a.is_number()) args.push_back(OracleVm::Val::num(a.get<std::int64_t>()));
      else args.emplace_back();
    }
    vm.run(r.at("class"), r.at("method"), std::move(args));
  }
  std::set<PlantKey> out;
  for (const auto& a : vm.accesses()) {
    out.insert({a.class_name, strip_owner(a.method_key), a.instruction, a.kind, a.operation, a.name});
  }
  return out;
}

inline PlantKey key_of(const Usage& u) {
  return {u.site.class_name, u.site.method.name + u.site.method.descriptor(), u.site.instruction,
          to_string(u.kind), to_string(u.operation), u.name.display()};
}

}  // namespace romid::testing
