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


"""Python access to the romid scanner.

The heavy lifting is in the compiled ``_romid`` module; this layer turns
its JSON text into Python objects.
"""

import json
import os

from . import _romid
from ._romid import (
    ConfigError,
    IngestError,
    InvariantError,
    OracleError,
    ParseError,
    RomidError,
    SCHEMA_VERSION,
    SchemaError,
    match_context,
    percent,
    version_bucket,
)

__all__ = [
    "ConfigError",
    "IngestError",
    "InvariantError",
    "OracleError",
    "ParseError",
    "RomidError",
    "SCHEMA_VERSION",
    "SchemaError",
    "aggregate",
    "aggregate_csv",
    "check_policy_agreement",
    "check_settings_agreement",
    "default_config",
    "match_context",
    "percent",
    "reset_diff",
    "scan",
    "scan_json",
    "version_bucket",
]


def _config_text(config):
    if config is None:
        return None
    if isinstance(config, str):
        return config
    return json.dumps(config)


def scan_json(rom, brand, model, config=None, threads=0, sdk=None):
    """Findings for one ROM tree as canonical JSON text."""
    return _romid.scan(os.fspath(rom), brand, model, _config_text(config), threads, sdk)


def scan(rom, brand, model, config=None, threads=0, sdk=None):
    """Findings for one ROM tree as a dict."""
    return json.loads(scan_json(rom, brand, model, config, threads, sdk))


def aggregate(files):
    return json.loads(_romid.aggregate([os.fspath(f) for f in files]))


def aggregate_csv(agg):
    return _romid.aggregate_csv(agg if isinstance(agg, str) else json.dumps(agg))


def default_config():
    return json.loads(_romid.default_config())


def reset_diff(before, after, min_len=6):
    return _romid.reset_diff(os.fspath(before), os.fspath(after), min_len)


def check_policy_agreement(first_seed=1, count=50, threads=1):
    return _romid.check_policy_agreement(first_seed, count, threads)


def check_settings_agreement(first_seed=1, count=100, threads=1):
    return _romid.check_settings_agreement(first_seed, count, threads)
