"""End-to-end acceptance criteria 1-14 on the default configuration.

Runs the full ``reproduce`` path once (including the byte-identity rerun)
and reports one pass/fail line per criterion; see the rows in report.json
for the individual measurements.
"""

import json

import pytest

from nanofiber_orbit.acceptance import reproduce

pytestmark = pytest.mark.acceptance

CRITERIA = range(1, 15)


@pytest.fixture(scope="module")
def report(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    rep = reproduce(out=out, threads=4, check_determinism=True)
    rep.out = out
    print()
    for row in rep.rows:
        print(row.line())
    return rep


def test_every_criterion_reported(report):
    assert set(report.criteria()) == set(CRITERIA)
    saved = json.loads((report.out / "report.json").read_text())
    assert len(saved["rows"]) == len(report.rows)
    assert {p.name for p in (report.out / "figures").iterdir()} == {
        "fig2_potentials.png", "fig3_density.png", "fig4_probe.png"}


@pytest.mark.parametrize("criterion", CRITERIA)
def test_criterion(report, criterion):
    rows = [r for r in report.rows if r.criterion == criterion]
    ok = all(r.passed for r in rows)
    print(f"\ncriterion {criterion:>2}: {'PASS' if ok else 'FAIL'}")
    failed = [r.line() for r in rows if not r.passed]
    assert ok, "\n".join(failed)
