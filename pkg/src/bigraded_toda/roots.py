"""Simultaneous polynomial root finding by Aberth-Ehrlich iteration."""
from __future__ import annotations

from typing import Optional

import numpy as np


class RootFindingError(ArithmeticError):
    """The iteration did not converge after all restarts."""


def _strip(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("zero polynomial")
    return c[nz[0]:]


def _initial_guesses(c: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = len(c) - 1
    # radius from the geometric mean of the roots, angles offset to avoid symmetric stalls
    radius = abs(c[-1] / c[0]) ** (1.0 / n) if c[-1] != 0 else 1.0
    radius = radius if radius > 0 else 1.0
    angles = 2 * np.pi * np.arange(n) / n + rng.uniform(0, 2 * np.pi) + 0.4
    return radius * np.exp(1j * angles)


def backward_error(coeffs, z) -> np.ndarray:
    """``|P(z)| / sum |a_k| |z|**k``: the relative residual of each root."""
    c = _strip(coeffs)
    z = np.asarray(z, dtype=complex)
    return np.abs(np.polyval(c, z)) / np.polyval(np.abs(c), np.abs(z))


def aberth(coeffs, tol: float = 1e-15, maxiter: int = 500, restarts: int = 8,
           rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """All roots of ``coeffs[0] z**n + ... + coeffs[n]`` (highest degree first)."""
    c = _strip(coeffs)
    n = len(c) - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return np.array([-c[1] / c[0]])
    rng = rng if rng is not None else np.random.default_rng(0)
    dc = np.polyder(c)
    for _ in range(restarts):
        z = _initial_guesses(c, rng)
        for _ in range(maxiter):
            p = np.polyval(c, z)
            dp = np.polyval(dc, z)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = p / dp
                diff = z[:, None] - z[None, :]
                np.fill_diagonal(diff, np.inf)
                s = np.sum(1.0 / diff, axis=1)
                step = ratio / (1 - ratio * s)
            step = np.where(p == 0, 0, step)
            if not np.all(np.isfinite(step)):
                break
            z = z - step
            if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(z))):
                break
        if np.all(np.isfinite(z)) and np.all(backward_error(c, z) < 1e-12):
            return _polish(c, dc, z)
    raise RootFindingError(f"no convergence for degree {n} polynomial")


def _polish(c, dc, z, steps: int = 2):
    for _ in range(steps):
        dp = np.polyval(dc, z)
        ok = dp != 0
        z = np.where(ok, z - np.polyval(c, z) / np.where(ok, dp, 1), z)
    return z


def sorted_roots(z) -> np.ndarray:
    """Canonical ordering (by real part, then imaginary part) for reproducible sums."""
    z = np.asarray(z)
    return z[np.lexsort((z.imag, z.real))]


__all__ = ["RootFindingError", "aberth", "backward_error", "sorted_roots"]
