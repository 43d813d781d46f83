"""Acceptance gate: every shipped criterion at its pinned tolerance.

Each test prints its one-line PASS/FAIL verdict straight to the terminal
(bypassing capture) so the gate stays legible inside any pytest run. The
criteria themselves live in evomatch.acceptance; `evomatch verify` runs
the same functions.
"""

from evomatch.acceptance import run_criteria


def _check(num, capsys):
    with capsys.disabled():
        print()
        result = run_criteria([num])[0]
    assert result.passed, f"criterion {num} {result.name}: {result.detail}"


def test_criterion_01_static_degeneracy(capsys):
    _check(1, capsys)


def test_criterion_02_stability_oracle(capsys):
    _check(2, capsys)


def test_criterion_03_proposal_count_scale(capsys):
    _check(3, capsys)


def test_criterion_04_adversarial_tightness(capsys):
    _check(4, capsys)


def test_criterion_05_one_sided_growth(capsys):
    _check(5, capsys)


def test_criterion_06_interleaved_vs_simple_separation(capsys):
    _check(6, capsys)


def test_criterion_07_sequential_sort_disagreement(capsys):
    _check(7, capsys)


def test_criterion_08_first_proposal_uniformity(capsys):
    _check(8, capsys)


def test_criterion_09_replay_determinism(capsys):
    _check(9, capsys)


def test_criterion_10_critical_event_rate(capsys):
    _check(10, capsys)
