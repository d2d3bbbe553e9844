"""Vectorized adaptive Simpson and composite Gauss-Legendre rules."""

from __future__ import annotations

from typing import Callable

import numpy as np

Integrand = Callable[[np.ndarray], np.ndarray]


def adaptive_simpson(
    f: Integrand,
    lo: float,
    hi: float,
    tol: float,
    initial_panels: int = 16,
    max_depth: int = 40,
) -> tuple[float, float]:
    """Integrate a vectorized ``f`` over ``[lo, hi]`` to absolute ``tol``.

    Every panel of the current generation is refined at once.  A panel is
    accepted when its two-halves Simpson estimate differs from the whole
    panel estimate by at most ``15 * tol_panel``; panel tolerances are split
    in proportion to width.  Returns ``(value, error_estimate)`` where the
    estimate sums the per-panel Richardson error terms.  Panels still
    unresolved at ``max_depth`` contribute their full discrepancy.
    """
    if hi == lo:
        return 0.0, 0.0
    if hi < lo:
        value, err = adaptive_simpson(f, hi, lo, tol, initial_panels, max_depth)
        return -value, err

    edges = np.linspace(lo, hi, initial_panels + 1)
    a, b = edges[:-1], edges[1:]
    m = 0.5 * (a + b)
    fx = f(np.concatenate([a, m, b[-1:]]))
    k = a.size
    fa, fm = fx[:k], fx[k : 2 * k]
    fb = np.concatenate([fa[1:], fx[-1:]])
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    ptol = np.full(k, tol / k)

    total = 0.0
    err_total = 0.0
    for depth in range(max_depth + 1):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        fq = f(np.concatenate([lm, rm]))
        flm, frm = fq[: a.size], fq[a.size :]
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        halves = left + right
        diff = halves - whole
        done = np.abs(diff) <= 15.0 * ptol
        if depth == max_depth:
            done[:] = True
            err_total += float(np.abs(diff[~(np.abs(diff) <= 15.0 * ptol)]).sum())
        total += float((halves[done] + diff[done] / 15.0).sum())
        err_total += float(np.abs(diff[done]).sum()) / 15.0
        keep = ~done
        if not keep.any():
            break
        a, m, b = a[keep], m[keep], b[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        flm, frm = flm[keep], frm[keep]
        left, right = left[keep], right[keep]
        half_tol = 0.5 * ptol[keep]
        # children: [a, m] with midpoint lm, [m, b] with midpoint rm
        a, m, b = np.concatenate([a, m]), np.concatenate([lm[keep], rm[keep]]), np.concatenate([m, b])
        fa, fm, fb = np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb])
        whole = np.concatenate([left, right])
        ptol = np.concatenate([half_tol, half_tol])
    return total, err_total


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(f: Integrand, lo: float, hi: float, panels: int = 64, order: int = 32) -> float:
    """Composite Gauss-Legendre rule with ``panels`` equal panels."""
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    nodes, weights = _GL_CACHE[order]
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).reshape(-1)
    fx = np.asarray(f(x)).reshape(panels, order)
    return float(np.sum(half * (fx @ weights)))
