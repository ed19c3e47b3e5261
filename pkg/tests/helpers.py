"""Shared test helpers: fixture lookup and the standard test scenarios."""

import math

import numpy as np

from rarefall.oracles import read_fixtures
from rarefall.scenarios import ExpCorrRayleigh, IidRice, InidRayleigh, OrderedInidRayleigh, db_to_linear

_ROWS = None


def fixture_rows(name=None):
    global _ROWS
    if _ROWS is None:
        _ROWS = read_fixtures()
    return [r for r in _ROWS if name is None or r.name == name]


def fixture(name, **inputs):
    """The unique fixture row called ``name`` whose inputs contain ``inputs``."""
    hits = []
    for r in fixture_rows(name):
        ok = True
        for k, v in inputs.items():
            have = r.inputs.get(k)
            if isinstance(v, (tuple, list)):
                have = np.atleast_1d(have) if have is not None else None
                ok = ok and have is not None and have.shape == (len(v),) and np.allclose(have, v, rtol=1e-12)
            elif isinstance(v, float):
                ok = ok and have is not None and math.isclose(have, v, rel_tol=1e-12)
            else:
                ok = ok and have == v
        if ok:
            hits.append(r)
    assert len(hits) == 1, f"expected one fixture {name} {inputs}, found {len(hits)}"
    return hits[0]


SQRT5 = math.sqrt(5.0)
ORDERED_OMEGAS = tuple(float(w) for w in db_to_linear([5, 5, 8, 8]))
ORDERED5_OMEGAS = tuple(float(w) for w in db_to_linear([5, 5, 5, 8, 8]))

# standard parameter sets used across the suite (Rice uses K = 3, Omega = 10 dB)
INID4 = InidRayleigh((10.0,) * 4)
CORR4 = ExpCorrRayleigh(SQRT5, 0.5, 4)
RICE4 = IidRice(3.0, 10.0, 4)
ORDERED4 = OrderedInidRayleigh(ORDERED_OMEGAS, 2)
REFERENCE_SCENARIOS = (INID4, CORR4, RICE4, ORDERED4)
