# Copyright 2026 The weakbound Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Weakly supervised boundary detection."""

from ._weakbound import (
    ConfigError,
    DataError,
    EdgeForest,
    Error,
    MaxFlowGraph,
    ParameterError,
    VersionError,
    correspond,
    evaluate,
    fh_segment,
    fuse,
    grabcut,
    intersect_sources,
    label_boundaries,
    nms_thin,
    objectness,
    predict,
    quantile_mask,
    run_stage,
    synth_sample,
    train_forest,
)

NEGATIVE, IGNORE, POSITIVE = 0, 128, 255

__all__ = [name for name in dir() if not name.startswith("_")]
