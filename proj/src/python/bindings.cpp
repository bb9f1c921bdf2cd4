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


#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "romid/config.hpp"
#include "romid/devicesim.hpp"
#include "romid/oracle_check.hpp"
#include "romid/report.hpp"
#include "romid/selinux.hpp"

namespace py = pybind11;

namespace {

romid::ScanConfig make_config(const std::optional<std::string>& config_json, unsigned threads) {
  romid::ScanConfig cfg = config_json ? romid::config_from_json(*config_json) : romid::ScanConfig{};
  if (threads) cfg.threads = threads;
  return cfg;
}

py::dict report_dict(const romid::AgreementReport& r) {
  py::list dis;
  for (const auto& d : r.disagreements) {
    py::dict x;
    x["seed"] = d.seed;
    x["key"] = d.key;
    x["subject"] = d.subject;
    x["analyzer"] = d.analyzer;
    x["oracle"] = d.oracle;
    dis.append(x);
  }
  py::dict out;
  out["specs"] = r.specs;
  out["property_checks"] = r.property_checks;
  out["setting_checks"] = r.setting_checks;
  out["disagreements"] = dis;
  return out;
}

}  // namespace

PYBIND11_MODULE(_romid, m) {
  m.doc() = "romid core bindings";

  auto base = py::register_exception<romid::Error>(m, "RomidError", PyExc_RuntimeError);
  py::register_exception<romid::IngestError>(m, "IngestError", base.ptr());
  py::register_exception<romid::ParseError>(m, "ParseError", base.ptr());
  py::register_exception<romid::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<romid::SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<romid::sim::OracleError>(m, "OracleError", base.ptr());
  py::register_exception<romid::InvariantError>(m, "InvariantError", PyExc_AssertionError);

  m.attr("SCHEMA_VERSION") = romid::kSchemaVersion;

  m.def(
      "scan",
      [](const std::filesystem::path& rom, const std::string& brand, const std::string& model,
         const std::optional<std::string>& config_json, unsigned threads, std::optional<int> sdk) {
        romid::ScanConfig cfg = make_config(config_json, threads);
        romid::ScanOptions opts;
        opts.sdk_override = sdk;
        py::gil_scoped_release release;
        return romid::findings_to_json(romid::scan(rom, brand, model, cfg, opts));
      },
      py::arg("rom"), py::arg("brand"), py::arg("model"), py::arg("config_json") = py::none(),
      py::arg("threads") = 0, py::arg("sdk") = py::none(), "Scan a ROM tree; returns findings JSON text.");

  m.def(
      "aggregate",
      [](const std::vector<std::filesystem::path>& files) {
        return romid::aggregate_to_json(romid::aggregate(files));
      },
      py::arg("files"), "Aggregate findings files; returns aggregate JSON text.");
  m.def(
      "aggregate_csv", [](const std::string& agg_json) { return romid::aggregate_to_csv(romid::aggregate_from_json(agg_json)); },
      py::arg("aggregate_json"));

  m.def("default_config", [] { return romid::config_to_json(romid::ScanConfig{}); });
  m.def(
      "normalize_config", [](const std::string& text) { return romid::config_to_json(romid::config_from_json(text)); },
      py::arg("config_json"));

  m.def("version_bucket", &romid::version_bucket, py::arg("sdk"));
  m.def("percent", &romid::percent, py::arg("vulnerable"), py::arg("sensitive"));

  m.def(
      "match_context",
      [](const std::string& contexts_text, const std::string& name) {
        romid::Diagnostics d;
        auto entries = romid::parse_property_contexts(contexts_text, "property_contexts", d);
        romid::ensure_default_entry(entries);
        romid::ContextMatcher matcher(std::move(entries));
        const auto& e = matcher.match(name);
        return py::make_tuple(e.pattern, e.type_name);
      },
      py::arg("contexts_text"), py::arg("name"), "Returns (pattern, type) of the entry matching name.");

  m.def(
      "reset_diff",
      [](const std::filesystem::path& before, const std::filesystem::path& after, std::size_t min_len) {
        return romid::sim::reset_diff(romid::sim::load_snapshot(before), romid::sim::load_snapshot(after), min_len);
      },
      py::arg("before"), py::arg("after"), py::arg("min_len") = romid::sim::kDefaultMinValueLength);

  m.def(
      "check_policy_agreement",
      [](std::uint64_t first_seed, std::size_t count, unsigned threads) {
        romid::AgreementReport r;
        {
          py::gil_scoped_release release;
          r = romid::check_policy_agreement(first_seed, count, threads);
        }
        return report_dict(r);
      },
      py::arg("first_seed") = 1, py::arg("count") = 50, py::arg("threads") = 1);
  m.def(
      "check_settings_agreement",
      [](std::uint64_t first_seed, std::size_t count, unsigned threads) {
        romid::AgreementReport r;
        {
          py::gil_scoped_release release;
          r = romid::check_settings_agreement(first_seed, count, threads);
        }
        return report_dict(r);
      },
      py::arg("first_seed") = 1, py::arg("count") = 100, py::arg("threads") = 1);
}
