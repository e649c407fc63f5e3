import json

import numpy as np
import pytest

from conftest import random_cp, random_tensor
from gpcpd.core.parser import (
    parse_factors,
    parse_tensor,
    read_factors,
    read_tensor,
    write_factors,
    write_tensor,
)
from gpcpd.exceptions import FormatError


def test_fixture_is_parsed(cube_3x3x3):
    assert cube_3x3x3.dims == (3, 3, 3)
    assert cube_3x3x3[0, 0, 0] == 11
    assert cube_3x3x3[2, 2, 2] == 8


def test_tensor_round_trip_is_bit_exact(tmp_path):
    t = random_tensor((3, 2, 4), 0) * (1 / 3)
    path = tmp_path / "t.json"
    write_tensor(path, t)
    back = read_tensor(path)
    assert back.dims == t.dims
    np.testing.assert_array_equal(back.data, t.data)
    with open(path, encoding="utf-8") as handle:
        assert json.load(handle)["format"] == "ctensor-v1"


def test_factors_round_trip(tmp_path):
    cp = random_cp((4, 3, 2), 2, seed=1)
    path = tmp_path / "f.json"
    write_factors(path, cp)
    back = read_factors(path)
    assert back.dims == cp.dims
    assert back.rank == 2
    for a, b in zip(back.factors, cp.factors):
        np.testing.assert_array_equal(a, b)


def test_tensor_is_row_major():
    t = parse_tensor(json.dumps({"format": "ctensor-v1", "dims": [2, 2],
                                 "data": [[1, 0], [2, 0], [3, 0], [0, 4]]}))
    assert t[0, 1] == 2
    assert t[1, 1] == 4j


@pytest.mark.parametrize("text, offset", [
    ('{"format": "ctensor-v1", x}', 25),
    ('{"note": "é", x}', 15),
])
def test_malformed_json_reports_byte_offset(text, offset):
    with pytest.raises(FormatError) as info:
        parse_tensor(text, "bad.json")
    assert info.value.offset == offset
    assert info.value.details["path"] == "bad.json"


def test_invalid_utf8_file(tmp_path):
    path = tmp_path / "latin1.json"
    path.write_bytes(b'{"format": "\xe9"}')
    with pytest.raises(FormatError) as info:
        read_tensor(path)
    assert info.value.offset == 12


def test_wrong_format_tag():
    text = json.dumps({"format": "cpfactors-v1", "dims": [1], "data": [[1, 0]]})
    with pytest.raises(FormatError) as info:
        parse_tensor(text)
    assert info.value.details["expected"] == "ctensor-v1"


@pytest.mark.parametrize("document", [
    {"format": "ctensor-v1", "dims": [2, 2], "data": [[1, 0], [2, 0], [3, 0]]},
    {"format": "ctensor-v1", "dims": [-1, 2], "data": []},
    {"format": "ctensor-v1", "dims": [], "data": []},
    {"format": "ctensor-v1", "dims": [1], "data": [[1, 0, 0]]},
    [1, 2, 3],
])
def test_invalid_tensor_documents(document):
    with pytest.raises(FormatError):
        parse_tensor(json.dumps(document))


@pytest.mark.parametrize("factors", [
    [[[[1, 0], [2, 0]]], [[[1, 0]]]],
    [[[[1, 0], [2, 0]], [[1, 0], [1, 0]]], [[[1, 0], [2, 0]]]],
    [[[[1, 0], [2, 0]]]],
])
def test_invalid_factor_documents(factors):
    text = json.dumps({"format": "cpfactors-v1", "dims": [2, 2], "rank": 1, "factors": factors})
    with pytest.raises(FormatError):
        parse_factors(text)
