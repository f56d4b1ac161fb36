import os
import tempfile

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sr_sampler.errors import AsymmetryError, DisconnectedError, NonpositiveWeight, ParseError
from sr_sampler.fileio import (format_overestimates, format_samples, parse_graph, parse_graph_text,
                               parse_kernel, parse_kernel_csv, parse_kernel_mm, parse_samples,
                               read_overestimates, write_graph, write_kernel_csv, write_kernel_mm)


def test_csv_identity():
    np.testing.assert_array_equal(parse_kernel_csv("1,0\n0,1\n"), np.eye(2))


def test_csv_ragged_row_names_line():
    with pytest.raises(ParseError) as info:
        parse_kernel_csv("1,0,0\n0,1\n0,0,1\n", "k.csv")
    assert info.value.line == 2
    assert "k.csv:2:" in str(info.value)


def test_csv_errors():
    with pytest.raises(ParseError):
        parse_kernel_csv("1,x\n0,1\n")
    with pytest.raises(ParseError):
        parse_kernel_csv("1,0\n")
    with pytest.raises(AsymmetryError):
        parse_kernel_csv("1,0.5\n0,1\n")


def test_matrix_market_lower_triangle_is_mirrored():
    text = ("%%MatrixMarket matrix coordinate real general\n"
            "3 3 4\n1 1 2\n2 1 0.5\n2 2 2\n3 3 1\n")
    expected = np.array([[2, 0.5, 0], [0.5, 2, 0], [0, 0, 1]])
    np.testing.assert_array_equal(parse_kernel_mm(text), expected)
    sym = text.replace("general", "symmetric")
    np.testing.assert_array_equal(parse_kernel_mm(sym), expected)


def test_matrix_market_dense_and_bad():
    dense = "%%MatrixMarket matrix array real general\n2 2\n1\n0.5\n0.5\n1\n"
    np.testing.assert_array_equal(parse_kernel_mm(dense), [[1, 0.5], [0.5, 1]])
    with pytest.raises(ParseError):
        parse_kernel_mm("%%MatrixMarket matrix array real general\n2 2\n1\n")
    with pytest.raises(AsymmetryError):
        parse_kernel_mm("%%MatrixMarket matrix array real general\n2 2\n1\n0.5\n0.2\n1\n")


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6)),
              elements=st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False)).flatmap(
    lambda d: arrays(np.float64, (len(d), len(d)),
                     elements=st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False))))
def test_csv_round_trip_is_bit_exact(M):
    L = np.triu(M) + np.triu(M, 1).T
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "k.csv")
        write_kernel_csv(path, L)
        back = parse_kernel(path)
    assert back.tobytes() == L.tobytes()


def test_matrix_market_round_trip(tmp_path):
    A = np.random.default_rng(0).standard_normal((5, 5))
    L = A @ A.T
    write_kernel_mm(tmp_path / "k.mtx", L)
    np.testing.assert_allclose(parse_kernel(tmp_path / "k.mtx"), L, rtol=1e-15)


def test_graph_triangle_and_default_weights():
    g = parse_graph_text("3 3\n0 1\n1 2\n0 2\n")
    assert (g.v, g.m) == (3, 3)
    assert g.lam.tolist() == [1.0, 1.0, 1.0]
    g = parse_graph_text("# comment\n3 4\n0 1 2.5\n1 2\n0 2 0.5\n0 1\n")
    assert g.lam.tolist() == [2.5, 1.0, 0.5, 1.0]


def test_graph_errors():
    with pytest.raises(DisconnectedError):
        parse_graph_text("4 2\n0 1\n2 3\n")
    with pytest.raises(NonpositiveWeight):
        parse_graph_text("2 1\n0 1 -1\n")
    for bad in ["2 1\n0 0\n", "2 1\n0 2\n", "2 2\n0 1\n", "x y\n", "2 1\n0 1 2 3\n", ""]:
        with pytest.raises(ParseError):
            parse_graph_text(bad)


def test_graph_file_round_trip(tmp_path):
    g = parse_graph_text("3 3\n0 1 0.1\n1 2 2\n0 2 3.5\n")
    write_graph(tmp_path / "g.txt", g)
    back = parse_graph(tmp_path / "g.txt")
    assert back.edges() == g.edges()
    with pytest.raises(ParseError):
        parse_graph(tmp_path / "missing.txt")


def test_samples_and_overestimates(tmp_path):
    text = format_samples(np.array([[3, 1], [0, 2]]))
    assert text == "1 3\n0 2\n"
    assert parse_samples(text) == [(1, 3), (0, 2)]
    (tmp_path / "q.txt").write_text(format_overestimates([0.5, 1.0, 0.1]))
    assert read_overestimates(tmp_path / "q.txt", 3).q.tolist() == [0.5, 1.0, 0.1]
    with pytest.raises(ParseError):
        read_overestimates(tmp_path / "q.txt", 4)
    (tmp_path / "bad.txt").write_text("0.5\n1.5\n")
    with pytest.raises(ParseError):
        read_overestimates(tmp_path / "bad.txt")
