# Copyright 2026 The xling Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings for the xling transfer-graph toolkit."""

from ._xling import (
    Error,
    InfeasibleError,
    IoError,
    ScoreMatrix,
    TransferGraph,
    ValidationError,
    Workspace,
    bin_for_percent,
    build_graph,
    classify_blood_type,
    finetune_score,
    graph_from_json,
    load_graph,
    load_workspace,
    parse_matrix,
    rank_donors,
    read_matrix,
    score_partitions,
    select,
    zero_shot,
)

__all__ = [
    "Error",
    "InfeasibleError",
    "IoError",
    "ScoreMatrix",
    "TransferGraph",
    "ValidationError",
    "Workspace",
    "bin_for_percent",
    "build_graph",
    "classify_blood_type",
    "finetune_score",
    "graph_from_json",
    "load_graph",
    "load_workspace",
    "parse_matrix",
    "rank_donors",
    "read_matrix",
    "score_partitions",
    "select",
    "zero_shot",
]
