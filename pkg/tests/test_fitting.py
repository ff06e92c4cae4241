"""Tests for the end-to-end filter fit."""
import numpy as np
import pytest

from autoreg.errors import LengthMismatchError
from autoreg.services.fitting import fit_filter


class TestFitFilter:
    def test_zero_prehistory_by_default(self, make_signal):
        sig, _ = make_signal(200, 4)
        result = fit_filter(sig.x, sig.d, 4)
        assert result.zero_prehistory
        assert result.solution.w_hat.shape == (4,)

    def test_explicit_prehistory(self, make_signal):
        sig, _ = make_signal(200, 4)
        result = fit_filter(sig.x, sig.d, 4, x_pre=sig.x_pre)
        assert not result.zero_prehistory
        assert result.solution.w_hat.shape == (4,)

    @pytest.mark.parametrize("size", [0, 3, 7])
    def test_prehistory_length_must_be_l_minus_one(self, make_signal, size):
        sig, _ = make_signal(200, 4)
        with pytest.raises(LengthMismatchError):
            fit_filter(sig.x, sig.d, 8, x_pre=np.zeros(size))
