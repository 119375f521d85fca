from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nvlab.norms import NormSpec

settings.register_profile(
    "nvlab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("nvlab")

OCTAGON = NormSpec.regular_polygon(8, np.pi / 8)
HEXAGON = NormSpec.regular_polygon(6)
ALL_NORMS = [NormSpec.l1(), NormSpec.l2(), NormSpec.linf(), OCTAGON, HEXAGON]


@pytest.fixture(params=ALL_NORMS, ids=lambda n: f"{n.kind.value}{len(n.vertices) if n.vertices else ''}")
def norm(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
