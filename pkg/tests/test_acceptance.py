"""The twelve acceptance criteria, each at its stated tolerance and time budget.

Criteria 1-11 are the named suites run once with seed 42; criterion 12
reruns everything with seed 42 (byte-identical CSVs) and seed 43 (same
verdicts).  Each test prints one pass/fail line.
"""

import filecmp
import time

import pytest

from weakconv import suites
from weakconv import testbeds as tb

SEED = 42


def _tree_files(root):
    return sorted(p.relative_to(root) for p in root.rglob("*.csv"))


def _say(capsys, criterion, name, ok, detail=""):
    with capsys.disabled():
        print(f"\n[criterion {criterion:2d}] {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())


@pytest.fixture(scope="module")
def first_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("verify_seed42")
    tb.clear_caches()
    t0 = time.perf_counter()
    results = suites.run_all(ctx=suites.Context(seed=SEED), out_dir=out)
    return {"out": out, "results": {r.name: r for r in results}, "seconds": time.perf_counter() - t0}


@pytest.mark.parametrize("name", suites.suite_names())
def test_criterion(name, first_run, capsys):
    res = first_run["results"][name]
    failed = [c.label for c in res.checks if not c.passed]
    in_time = res.seconds < res.limit
    ok = res.passed and in_time
    _say(capsys, res.criterion, name, ok,
         f"({res.seconds:.1f} s of {res.limit:g} s; worst margin {res.worst_margin})")
    assert not failed, f"failed checks: {failed}"
    assert in_time, f"{name} took {res.seconds:.1f} s, budget {res.limit} s"


def test_criterion_12_determinism(first_run, tmp_path, capsys):
    budget = sum(limit for _, _, limit, _ in suites.SUITES.values())
    t0 = time.perf_counter()
    tb.clear_caches()
    same = tmp_path / "seed42"
    suites.run_all(ctx=suites.Context(seed=SEED), out_dir=same)
    other = suites.run_all(ctx=suites.Context(seed=SEED + 1), out_dir=tmp_path / "seed43")
    seconds = time.perf_counter() - t0

    files = _tree_files(first_run["out"])
    assert files == _tree_files(same)
    mismatch = [str(f) for f in files
                if not filecmp.cmp(first_run["out"] / f, same / f, shallow=False)]

    verdicts = {n: [c.passed for c in r.checks] for n, r in first_run["results"].items()}
    other_verdicts = {r.name: [c.passed for c in r.checks] for r in other}
    ok = not mismatch and verdicts == other_verdicts and seconds < 2 * budget
    _say(capsys, 12, "determinism", ok, f"({len(files)} CSVs, rerun {seconds:.1f} s)")
    assert not mismatch, f"CSV bytes differ: {mismatch}"
    assert verdicts == other_verdicts
    assert seconds < 2 * budget
