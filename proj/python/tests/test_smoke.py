# Copyright 2026 The romid Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import json
import pathlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import romid

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "fixtures"
CORPUS = [FIXTURES / "corpus" / f"{n}.findings.json" for n in ("acme_a1", "acme_a2", "nova_n1", "nova_n2", "zeta_z1")]


def test_scan_matches_golden():
    text = romid.scan_json(FIXTURES / "rom" / "acme_a1", "Acme", "A1")
    assert text == (FIXTURES / "rom" / "acme_a1.findings.json").read_text()


def test_scan_dict_and_threads():
    one = romid.scan(FIXTURES / "rom" / "acme_a1", "Acme", "A1", threads=1)
    four = romid.scan(FIXTURES / "rom" / "acme_a1", "Acme", "A1", threads=4)
    assert one == four
    assert one["schema_version"] == romid.SCHEMA_VERSION
    assert one["descriptor"]["sdk_version"] == 33


def test_sdk_override():
    f = romid.scan(FIXTURES / "rom" / "acme_a1", "Acme", "A1", sdk=29)
    assert f["descriptor"]["sdk_version"] == 29


def test_aggregate_csv():
    agg = romid.aggregate(CORPUS)
    assert agg["totals"]["devices"] == 5
    assert romid.aggregate_csv(agg) == (FIXTURES / "corpus" / "expected.csv").read_text()


def test_config_round_trip_and_errors():
    cfg = romid.default_config()
    assert cfg == romid.default_config()
    assert romid.scan(FIXTURES / "rom" / "acme_a1", "Acme", "A1", config=cfg)["partial"] is False
    with pytest.raises(romid.ConfigError):
        romid.scan(FIXTURES / "rom" / "acme_a1", "Acme", "A1", config={"bogus": 1})
    with pytest.raises(romid.RomidError):
        romid.scan(FIXTURES / "rom" / "missing", "Acme", "A1")


def test_schema_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 99}))
    with pytest.raises(romid.SchemaError):
        romid.aggregate([bad])


def test_reset_diff():
    keys = romid.reset_diff(FIXTURES / "reset" / "before.json", FIXTURES / "reset" / "after.json")
    assert keys == [
        "property:persist.vendor.radio.imei1",
        "property:ro.boot.serialno",
        "setting:Global:acme_device_meid",
        "setting:Secure:acme_wifi_mac_backup",
    ]
    with pytest.raises(romid.InvariantError):
        romid.reset_diff(FIXTURES / "reset" / "after.json", FIXTURES / "reset" / "before.json")


def test_buckets_and_percent():
    assert romid.version_bucket(0) == "unknown"
    assert romid.version_bucket(23) == "pre_v6"
    assert romid.version_bucket(33) == "v13"
    assert romid.version_bucket(35) == "v15+"
    assert romid.percent(2, 3) == 67
    assert romid.percent(0, 0) == 0


def test_oracle_agreement():
    assert romid.check_policy_agreement(1, 20)["disagreements"] == []
    assert romid.check_settings_agreement(1, 100)["disagreements"] == []


def brute_force(entries, name):
    best = None
    for i, (pattern, _) in enumerate(entries):
        if pattern == name:
            return i
    for i, (pattern, _) in enumerate(entries):
        if pattern.endswith("*") and name.startswith(pattern[:-1]):
            if best is None or len(pattern) > len(entries[best][0]):
                best = i
    return best


patterns = st.text(alphabet="ab.", min_size=1, max_size=4).flatmap(
    lambda s: st.sampled_from([s, s + "*"])
)


@settings(max_examples=300, deadline=None)
@given(st.lists(patterns, min_size=1, max_size=8), st.text(alphabet="ab.", min_size=1, max_size=5))
def test_match_context_is_longest_match(pats, name):
    entries = [(p, f"t{i}_prop") for i, p in enumerate(pats)]
    text = "".join(f"{p} u:object_r:{t}:s0\n" for p, t in entries)
    got = romid.match_context(text, name)
    want = brute_force(entries, name)
    if want is None:
        assert got == ("*", "default_prop")
    else:
        assert got == entries[want]
