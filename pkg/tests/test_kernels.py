import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fspec import kernels

needs_compiled = pytest.mark.skipif(
    kernels.compiled_separable_sum is None, reason="compiled extension not built"
)

vec = st.lists(st.floats(0.0, 3.0), min_size=1, max_size=12)


def weights(n, seed):
    return np.random.default_rng(seed).uniform(0.1, 1.0, n)


def brute(a, wa, b, wb, c, wc, z, power):
    d = a[:, None, None] + b[None, :, None] + c[None, None, :] - z
    w = wa[:, None, None] * wb[None, :, None] * wc[None, None, :]
    return float(np.sum(w / d**power))


class TestPythonBackend:
    @given(vec, vec, vec, st.floats(-5.0, -0.1), st.sampled_from([1, 2]))
    def test_matches_brute_force(self, a, b, c, z, power):
        a, b, c = map(np.array, (a, b, c))
        wa, wb, wc = weights(len(a), 1), weights(len(b), 2), weights(len(c), 3)
        got = kernels.python_separable_sum(a, wa, b, wb, c, wc, z, power)
        assert got == pytest.approx(brute(a, wa, b, wb, c, wc, z, power), rel=1e-12)

    def test_rejects_power(self):
        with pytest.raises(ValueError):
            kernels.python_separable_sum([1.0], [1.0], [1.0], [1.0], [1.0], [1.0], 0.0, 3)


@needs_compiled
class TestCompiledBackend:
    @given(vec, vec, vec, st.floats(-5.0, -0.1), st.sampled_from([1, 2]))
    def test_agrees_with_python(self, a, b, c, z, power):
        a, b, c = map(np.array, (a, b, c))
        wa, wb, wc = weights(len(a), 4), weights(len(b), 5), weights(len(c), 6)
        fast = kernels.compiled_separable_sum(a, wa, b, wb, c, wc, z, power)
        slow = kernels.python_separable_sum(a, wa, b, wb, c, wc, z, power)
        assert fast == pytest.approx(slow, rel=1e-12)

    def test_rejects_power(self):
        with pytest.raises(ValueError):
            kernels.compiled_separable_sum([1.0], [1.0], [1.0], [1.0], [1.0], [1.0], 0.0, 0)

    def test_default_backend(self):
        assert kernels.BACKEND in ("cython", "python")
