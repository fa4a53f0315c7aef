"""Acceptance criteria 1 to 10, one pass/fail line each (run with -s to see them)."""
import json
import subprocess
import sys
import time

import pytest

from clarklab import acceptance

SEED = 0


def report(result):
    print(result.line())
    for c in result.checks:
        print(f"    {c.name}: {c.value:.3e} ({c.relation} {c.tolerance:g})")


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    result = acceptance.CRITERIA[number](SEED)
    report(result)
    assert result.passed, result.line()
    limit = acceptance.RUNTIME_LIMITS.get(number)
    if limit is not None:
        assert result.runtime < limit


@pytest.mark.slow
def test_criterion_10_determinism(tmp_path):
    start = time.perf_counter()
    reports = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        proc = subprocess.run([sys.executable, "-m", "clarklab.cli", "acceptance", "--seed", str(SEED),
                               "--out", str(out), "--quiet"], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        reports.append((out / "acceptance.json").read_bytes())
    per_run = (time.perf_counter() - start) / 2
    same = reports[0] == reports[1]
    fast = per_run < acceptance.SUITE_LIMIT
    print(f"criterion 10 {'PASS' if same and fast else 'FAIL'} determinism and runtime "
          f"(identical={same}, {per_run:.1f} s per run)")
    assert same
    assert fast
    assert all(c["passed"] for c in json.loads(reports[0])["checks"])
