"""Every acceptance criterion at its stated tolerance; one PASS/FAIL line each.

Run directly with ``python tests/test_acceptance.py`` for the lines alone.
"""
import pytest

from loopalg.acceptance import ALL_CHECKS

try:
    from conftest import record_acceptance
except ImportError:  # direct execution
    def record_acceptance(line):
        pass


@pytest.mark.parametrize("key", list(ALL_CHECKS))
def test_criterion(key):
    result = ALL_CHECKS[key]()
    line = result.line()
    print(line)
    record_acceptance(line)
    assert result.passed, line


if __name__ == "__main__":
    import sys

    results = [ALL_CHECKS[k]() for k in ALL_CHECKS]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.passed for r in results) else 1)
