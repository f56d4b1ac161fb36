import itertools

import numpy as np
import pytest

from sr_sampler.cli import main
from sr_sampler.fileio import parse_samples, write_graph, write_kernel_csv, write_kernel_mm
from sr_sampler.spanning_tree import WeightedGraph


@pytest.fixture
def files(tmp_path):
    write_kernel_mm(tmp_path / "id10.mtx", np.eye(10))
    F = np.random.default_rng(1).standard_normal((6, 2))
    write_kernel_csv(tmp_path / "rank2.csv", F @ F.T)
    write_graph(tmp_path / "k4.txt", WeightedGraph(4, list(itertools.combinations(range(4), 2))))
    return tmp_path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_tree_is_deterministic(files, capsys):
    argv = ["sample-tree", "--graph", files / "k4.txt", "--samples", 5, "--seed", 7]
    code, first, _ = run(argv, capsys)
    assert code == 0
    assert run(argv, capsys)[1] == first
    trees = parse_samples(first)
    assert len(trees) == 5 and all(len(t) == 3 for t in trees)


def test_sample_dpp_output_format(files, capsys):
    code, out, _ = run(["sample-dpp", "--kernel", files / "id10.mtx", "--k", 3, "--samples", 4], capsys)
    assert code == 0
    for line in out.splitlines():
        idx = [int(x) for x in line.split()]
        assert len(idx) == 3 and idx == sorted(idx) and all(0 <= i < 10 for i in idx)


def test_rank_deficient_kernel_is_input_error(files, capsys):
    code, _, err = run(["sample-dpp", "--kernel", files / "rank2.csv", "--k", 3], capsys)
    assert code == 1
    assert "InfeasibleK" in err


def test_unknown_flag_exits_64(files, capsys):
    code, _, err = run(["sample-dpp", "--kernel", files / "id10.mtx", "--k", 3, "--bogus"], capsys)
    assert code == 64
    assert "usage" in err
    assert run(["frobnicate"], capsys)[0] == 64


def test_missing_file_is_input_error(files, capsys):
    assert run(["sample-dpp", "--kernel", files / "nope.csv", "--k", 2], capsys)[0] == 1
    assert run(["verify", "--k", 2], capsys)[0] == 64


def test_verify_pass_and_fail(files, capsys):
    argv = ["verify", "--kernel", files / "id10.mtx", "--k", 3, "--samples", 200_000, "--tol", 0.05]
    code, out, _ = run(argv, capsys)
    assert code == 0 and "status=pass" in out
    code, out, _ = run(argv[:-1] + [0.001], capsys)
    assert code == 2 and "status=fail" in out


def test_marginals_hand_off(files, capsys):
    q_path = files / "q.txt"
    code, _, _ = run(["estimate-marginals", "--kernel", files / "id10.mtx", "--k", 2, "--out", q_path], capsys)
    assert code == 0
    assert len(q_path.read_text().split()) == 10
    base = ["sample-dpp", "--kernel", files / "id10.mtx", "--k", 2, "--samples", 20, "--seed", 3]
    code, out, _ = run(base + ["--marginals", q_path, "--t-mult", 1.5], capsys)
    assert code == 0 and len(out.splitlines()) == 20
    code, out, _ = run(base + ["--exact"], capsys)
    assert code == 0 and len(out.splitlines()) == 20


def test_out_file_matches_stdout(files, capsys):
    argv = ["sample-dpp", "--kernel", files / "id10.mtx", "--k", 3, "--samples", 10, "--seed", 5]
    _, out, _ = run(argv, capsys)
    assert run(argv + ["--out", files / "s.txt"], capsys)[0] == 0
    assert (files / "s.txt").read_text() == out


def test_mix_curve_and_concentration(files, capsys):
    code, out, _ = run(["mix-curve", "--kernel", files / "id10.mtx", "--k", 2, "--samples", 2000,
                        "--grid", "0,1,2", "--t-mult", 1.5], capsys)
    assert code == 0
    assert out.splitlines()[0] == "rounds,tv,se" and len(out.splitlines()) == 4
    code, out, _ = run(["concentration", "--kernel", files / "id10.mtx", "--k", 2, "--s", 6,
                        "--trials", 20, "--csv", files / "c.csv"], capsys)
    assert code == 0
    assert "trials=20" in out.splitlines()
    assert (files / "c.csv").exists()


def test_bench_small_grid(capsys, monkeypatch):
    monkeypatch.setenv("SR_SAMPLER_THREADS", "1")
    code, out, _ = run(["bench", "--k", 2, "--n-grid", "64,128", "--samples", 2], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("n,k,d,path")
    assert [l.split(",")[3] for l in lines[1:]] == ["sparsified", "sparsified"]
    code, out, _ = run(["bench", "--k", 2, "--n-grid", "64", "--samples", 2, "--exact"], capsys)
    assert [l.split(",")[3] for l in out.splitlines()[1:]] == ["exact", "exact-cached"]


def test_bad_thread_setting(files, capsys, monkeypatch):
    monkeypatch.setenv("SR_SAMPLER_THREADS", "many")
    assert run(["sample-tree", "--graph", files / "k4.txt"], capsys)[0] == 1
