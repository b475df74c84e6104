import numpy as np
import pytest

from muonbound import BoundConstants, bound_terms, verify_suite
from muonbound.verify import CHECKS, _REQUIRED_CHECKS, nesterov_shift_holds


def test_fast_suite_passes():
    report = verify_suite("fast")
    failed = [r.name for r in report.results if not r.passed]
    assert report.passed, f"failed checks: {failed}"
    assert report.level == "fast"
    assert len(report.summary_lines()) == len(report.results) + 1


def test_required_checks_registered_exactly_once():
    names = [name for name, _ in CHECKS]
    assert len(names) == len(set(names))
    for required in _REQUIRED_CHECKS:
        assert names.count(required) == 1


def test_invalid_level_rejected():
    with pytest.raises(ValueError):
        verify_suite("medium")


def test_nesterov_shift_detects_missing_shift():
    # feeding an evaluation that forgot the extra momentum factor (i.e. the
    # plain terms posing as the Nesterov ones) must trip the check
    c = BoundConstants(c1=1.0, c2=2.0, c3=0.7, c4=8.0, c5=1.2, c6=1.2)
    rng = np.random.default_rng(0)
    etas = rng.uniform(0.01, 0.2, size=32)
    isb = rng.uniform(0.1, 1.0, size=32)
    beta = 0.9
    plain = bound_terms(c, etas, isb, beta, nesterov=False)
    nes = bound_terms(c, etas, isb, beta, nesterov=True)
    assert nesterov_shift_holds(plain, nes, beta, etas, isb, c.c6)

    from dataclasses import replace

    broken = replace(nes, term3=plain.term3, term4=plain.term4, term5=plain.term5)
    assert not nesterov_shift_holds(plain, broken, beta, etas, isb, c.c6)
    wrong_tail = replace(nes, term6=nes.term6 * 2.0)
    assert not nesterov_shift_holds(plain, wrong_tail, beta, etas, isb, c.c6)
