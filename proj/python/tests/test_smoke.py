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

"""Smoke tests for the Python bindings."""

import json
import os
import pathlib

import jsonschema
import pytest

import xling

ROOT = pathlib.Path(os.environ.get("XLING_SOURCE_DIR", pathlib.Path(__file__).parents[2]))
WORKSPACE = ROOT / "tests" / "fixtures" / "workspace"

FI_DE = """# orientation=row-source
src\tfi\tde
fi\t0.5\t0.755
de\t0.38\t0.5
"""


def test_parse_matrix_and_finetune_score():
    m = xling.parse_matrix(FI_DE, "row-source")
    assert m.languages == ["fi", "de"]
    assert m.complete()
    assert xling.finetune_score(m, "fi", "de") == 0.51
    assert xling.finetune_score(m, "de", "fi") == -0.24


def test_orientation_conflict_raises_validation_error():
    with pytest.raises(xling.ValidationError, match="orientation"):
        xling.parse_matrix(FI_DE, "col-source")


def test_missing_matrix_raises_io_error():
    with pytest.raises(xling.IoError):
        xling.read_matrix(WORKSPACE / "missing.tsv")


@pytest.mark.parametrize(
    "percent,expected",
    [(-10.5, "Negative"), (-10.0, "Neutral"), (10.0, "Positive"), (55.0, "VeryPositive")],
)
def test_bin_for_percent(percent, expected):
    assert xling.bin_for_percent(percent) == expected


def test_graph_matches_fixture_and_schema():
    matrix = xling.read_matrix(WORKSPACE / "matrix.tsv")
    graph = xling.build_graph(matrix, WORKSPACE / "langs.tsv", WORKSPACE / "wals.csv")
    fixture = json.loads((WORKSPACE / "graph.json").read_text())
    doc = graph.to_json()
    doc["meta"]["created_at"] = fixture["meta"]["created_at"]
    assert doc == fixture
    schema = json.loads((ROOT / "schema" / "graph.schema.json").read_text())
    jsonschema.validate(doc, schema)
    assert xling.graph_from_json(doc) == xling.load_graph(WORKSPACE / "graph.json")
    assert sum(graph.bin_histogram().values()) == len(graph) * (len(graph) - 1)


def test_save_round_trip(tmp_path):
    graph = xling.load_graph(WORKSPACE / "graph.json")
    graph.save(tmp_path / "g.json")
    assert xling.load_graph(tmp_path / "g.json") == graph


def test_selection():
    graph = xling.load_graph(WORKSPACE / "graph.json")
    ranked = xling.rank_donors(graph)
    assert sorted(ranked) == graph.codes()
    picked = xling.select(graph, k=1, mode="most_donating", min_families=1, exclude={"xb", "xd"})
    manifest = json.loads((WORKSPACE / "configs" / "most.json").read_text())
    assert picked == manifest["donors"]
    with pytest.raises(xling.InfeasibleError):
        xling.select(graph, k=4, min_families=1, exclude={"xa"})


def test_workspace_requests():
    ws = xling.load_workspace(WORKSPACE)
    status, body = ws.request("GET", "/graph")
    assert status == 200
    assert json.loads(body) == json.loads((WORKSPACE / "graph.json").read_text())
    status, _ = ws.request("GET", "/nope")
    assert status == 404
    status, body = ws.request("GET", "/hypotheses")
    assert status == 200
    assert json.loads(body) == ws.hypotheses()
    assert sorted(ws.config_ids) == ["control", "least", "most", "random"]
