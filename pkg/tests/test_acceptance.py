"""One test per acceptance criterion, each printing a single PASS/FAIL line.

The lines are also collected in ``RESULTS`` and echoed in the pytest
terminal summary.
"""
import time

import pytest

from hpflow import checks
from hpflow.models import PRESETS, preset

PRESET_NAMES = sorted(PRESETS)
TIME_LIMIT = 10.0
RESULTS = {}


def verdict(number: int, title: str, run):
    """Run ``run() -> [(label, Check)]``, record one line and assert."""
    start = time.perf_counter()
    labelled = run()
    elapsed = time.perf_counter() - start
    failed = [(label, c) for label, c in labelled if not c.passed]
    worst = failed[0] if failed else None
    status = "PASS" if not failed and elapsed < TIME_LIMIT else "FAIL"
    detail = f"{len(labelled)} checks, {len(failed)} failed, {elapsed:.2f}s"
    if worst:
        detail += f"; first failure {worst[0]} {worst[1].line()}"
    line = f"criterion {number:2d} [{status}] {title}: {detail}"
    RESULTS[number] = line
    print(line)
    assert not failed, line
    assert elapsed < TIME_LIMIT, line


def per_preset(fn, names=PRESET_NAMES):
    def run():
        return [(name, c) for name in names for c in fn(preset(name))]

    return run


def test_criterion_01_unitarity():
    verdict(1, "step and flow unitarity", per_preset(checks.unitarity_checks))


def test_criterion_02_vacuum_convergence():
    def run():
        cs, _ = checks.convergence_checks(preset("amplitude-damping"), checks.CONVERGENCE_DTS, 1.0)
        return [("amplitude-damping", c) for c in cs]

    verdict(2, "first-order vacuum expectation convergence", run)


def test_criterion_03_lindblad_structure():
    verdict(3, "trace and positivity of the Lindblad semigroup", per_preset(checks.lindblad_checks))


def test_criterion_04_kernel_two_formula():
    verdict(4, "kernel from generators equals coupling formula", per_preset(checks.kernel_checks))


def test_criterion_05_gram_positivity():
    verdict(5, "Gram positivity and sign rule", per_preset(checks.gram_checks))


def test_criterion_06_reconstruction():
    verdict(6, "noise space reconstruction", per_preset(checks.reconstruction_checks))


def test_criterion_07_independence_stationarity():
    verdict(7, "factorization and translation invariance", per_preset(checks.independence_checks))


def test_criterion_08_two_point_generator():
    verdict(8, "two-point generator finite difference", per_preset(checks.two_point_checks, ["amplitude-damping", "dephasing"]))


def test_criterion_09_gaussian_probe():
    verdict(9, "triple product decay ratio below 1e-2", per_preset(checks.gaussian_checks))


def test_criterion_10_equivalence():
    def run():
        return [(name, c) for name in PRESET_NAMES for c in checks.equivalence_checks(preset(name))[0]]

    verdict(10, "round-trip equivalence certificate", run)
