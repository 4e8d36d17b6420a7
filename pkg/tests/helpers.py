import numpy as np

# pass/fail lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_image(rng, n, real=False):
    z = rng.standard_normal((n, n))
    if not real:
        z = z + 1j * rng.standard_normal((n, n))
    return z


def random_mask(rng, n, p):
    return rng.random((n, n)) < p
