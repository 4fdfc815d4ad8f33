"""Independent reference implementations shared by the test modules.

They are written for clarity, not speed, and share no code with the
package paths they check.
"""
import math

import numpy as np

from dayahead.neural import autodiff as ad
from dayahead.neural.models import forward, init_params
from dayahead.neural.training import gradients


def oracle_mape(actual, forecast):
    """Percentage error by plain loops and exactly rounded summation."""
    terms = [abs((a - f) / a) for a, f in zip(actual, forecast)]
    return 100.0 * math.fsum(terms) / len(terms)


def toy_params(arch, seed=1, steps=4, channels=3, hidden=3):
    h = (hidden, hidden) if arch == "fcdnn" else (hidden,)
    return init_params(arch, channels, h, np.random.default_rng(seed), steps=steps)


def finite_difference_check(params, x, y, fused=True, eps=1e-5, floor=1e-12):
    """Max relative error between reverse-mode and central-difference gradients.

    ``floor`` bounds the denominator so near-zero elements are judged on
    absolute error instead.
    """
    params.zero_grad()
    ad.backward(ad.mse(forward(params, x, fused=fused), y))
    analytic = gradients(params)
    worst = 0.0
    for name, t in params.tensors.items():
        for idx in np.ndindex(t.shape):
            old = t.data[idx]
            t.data[idx] = old + eps
            with ad.no_grad():
                up = ad.mse(forward(params, x, fused=fused), y).data[0, 0]
            t.data[idx] = old - eps
            with ad.no_grad():
                down = ad.mse(forward(params, x, fused=fused), y).data[0, 0]
            t.data[idx] = old
            num = (up - down) / (2 * eps)
            a = analytic[name][idx]
            worst = max(worst, abs(a - num) / max(abs(a), abs(num), floor))
    return worst
