import warnings

import pytest
from hypothesis import settings

settings.register_profile("fqm", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("fqm")


@pytest.fixture(autouse=True)
def _no_boundary_warning_noise():
    # tests that care about BoundaryMassWarning use pytest.warns explicitly
    from fqm.dynamics import BoundaryMassWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryMassWarning)
        yield
