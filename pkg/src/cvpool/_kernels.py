"""Hot training kernel: pairwise dual ascent for the soft-margin linear SVM.

The trainer is written as scalar loops over numpy arrays so that numba can
compile it in nopython mode. When numba is importable (and not disabled via
``CVPOOL_DISABLE_NUMBA=1``) the exported ``smo_train`` is the JIT-compiled
build; otherwise it is the interpreted build of the same code. Both builds
execute the identical sequence of floating-point operations, so results are
bit-identical either way -- switching the backend never changes an
experiment's output. ``smo_train_python`` is always the interpreted build,
kept for the benchmark and for parity tests.

Algorithm: repeatedly pick a KKT-violating sample (passes over unbound
samples, falling back to full passes), pair it with a second sample chosen
by the largest bias-free error gap, and solve the two-variable subproblem in
closed form with box clipping. The bias is recomputed from the unbound
support vectors after every update, and termination is declared when no
sample violates the KKT conditions by more than ``tol`` under that bias.
"""

import os

import numpy as np


def _build_kernels(decorate):
    """Build the solver call chain, applying ``decorate`` to every stage."""

    @decorate
    def bias_from_state(X, y, C, alphas, w):
        # Bias implied by the current dual state: mean of y_k - w.x_k over
        # unbound support vectors; with none unbound, the midpoint of the
        # interval of biases compatible with the bound samples' conditions.
        n, d = X.shape
        total = 0.0
        n_unbound = 0
        lo = -np.inf
        hi = np.inf
        for k in range(n):
            wx = 0.0
            for t in range(d):
                wx += w[t] * X[k, t]
            c = y[k] - wx
            a = alphas[k]
            if 0.0 < a < C:
                total += c
                n_unbound += 1
            elif a <= 0.0:
                if y[k] > 0.0:
                    if c > lo:
                        lo = c
                else:
                    if c < hi:
                        hi = c
            else:
                if y[k] > 0.0:
                    if c < hi:
                        hi = c
                else:
                    if c > lo:
                        lo = c
        if n_unbound > 0:
            return total / n_unbound
        if lo == -np.inf and hi == np.inf:
            return 0.0
        if lo == -np.inf:
            return hi
        if hi == np.inf:
            return lo
        return 0.5 * (lo + hi)

    @decorate
    def take_step(X, y, C, alphas, w, i, j):
        # Closed-form update of the (i, j) pair; returns 1 if state changed.
        if i == j:
            return 0
        d = X.shape[1]
        ai = alphas[i]
        aj = alphas[j]
        yi = y[i]
        yj = y[j]
        s = yi * yj
        if s < 0.0:
            L = max(0.0, aj - ai)
            H = min(C, C + aj - ai)
        else:
            L = max(0.0, ai + aj - C)
            H = min(C, ai + aj)
        if L >= H:
            return 0
        kii = 0.0
        kjj = 0.0
        kij = 0.0
        for t in range(d):
            kii += X[i, t] * X[i, t]
            kjj += X[j, t] * X[j, t]
            kij += X[i, t] * X[j, t]
        # bias-free errors: the bias cancels from every pairwise quantity
        ei = -yi
        ej = -yj
        for t in range(d):
            ei += w[t] * X[i, t]
            ej += w[t] * X[j, t]
        eta = kii + kjj - 2.0 * kij
        if eta > 0.0:
            aj_new = aj + yj * (ei - ej) / eta
            if aj_new < L:
                aj_new = L
            elif aj_new > H:
                aj_new = H
        else:
            # flat direction (duplicate points): take the better endpoint
            slope = yj * (ei - ej)
            if slope > 0.0:
                aj_new = H
            elif slope < 0.0:
                aj_new = L
            else:
                return 0
        # snap to the box corners so bound detection stays exact
        eps = 1e-10 * max(C, 1.0)
        if aj_new < eps:
            aj_new = 0.0
        elif aj_new > C - eps:
            aj_new = C
        if abs(aj_new - aj) < 1e-12 * (aj_new + aj + 1.0):
            return 0
        ai_new = ai + s * (aj - aj_new)
        if ai_new < eps:
            ai_new = 0.0
        elif ai_new > C - eps:
            ai_new = C
        dwi = yi * (ai_new - ai)
        dwj = yj * (aj_new - aj)
        for t in range(d):
            w[t] += dwi * X[i, t] + dwj * X[j, t]
        alphas[i] = ai_new
        alphas[j] = aj_new
        return 1

    @decorate
    def examine(X, y, C, alphas, w, i):
        # Try to make progress on violator i; returns 1 if a step was taken.
        n, d = X.shape
        ei = -y[i]
        for t in range(d):
            ei += w[t] * X[i, t]
        # first choice: unbound j with the largest error gap, lowest index wins ties
        best_j = -1
        best_gap = 0.0
        for j in range(n):
            if j == i or alphas[j] <= 0.0 or alphas[j] >= C:
                continue
            ej = -y[j]
            for t in range(d):
                ej += w[t] * X[j, t]
            gap = abs(ei - ej)
            if gap > best_gap:
                best_gap = gap
                best_j = j
        if best_j >= 0:
            if take_step(X, y, C, alphas, w, i, best_j) == 1:
                return 1
        # fall back to unbound samples in index order, then to all samples
        for j in range(n):
            if j == i or alphas[j] <= 0.0 or alphas[j] >= C:
                continue
            if take_step(X, y, C, alphas, w, i, j) == 1:
                return 1
        for j in range(n):
            if j == i:
                continue
            if take_step(X, y, C, alphas, w, i, j) == 1:
                return 1
        return 0

    @decorate
    def smo_train(X, y, C, tol, max_sweeps):
        # Train the dual problem; returns (alphas, w, b, converged, sweeps).
        n, d = X.shape
        alphas = np.zeros(n)
        w = np.zeros(d)
        converged = False
        sweeps = 0
        examine_all = True
        while sweeps < max_sweeps:
            sweeps += 1
            b = bias_from_state(X, y, C, alphas, w)
            worst = 0.0
            for k in range(n):
                wx = 0.0
                for t in range(d):
                    wx += w[t] * X[k, t]
                r = y[k] * (wx + b) - 1.0
                if alphas[k] < C and -r > worst:
                    worst = -r
                if alphas[k] > 0.0 and r > worst:
                    worst = r
            if worst <= tol:
                converged = True
                break
            num_changed = 0
            for i in range(n):
                if not examine_all and (alphas[i] <= 0.0 or alphas[i] >= C):
                    continue
                b = bias_from_state(X, y, C, alphas, w)
                wxi = 0.0
                for t in range(d):
                    wxi += w[t] * X[i, t]
                r = y[i] * (wxi + b) - 1.0
                if (alphas[i] < C and r < -tol) or (alphas[i] > 0.0 and r > tol):
                    num_changed += examine(X, y, C, alphas, w, i)
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True
        b = bias_from_state(X, y, C, alphas, w)
        return alphas, w, b, converged, sweeps

    return smo_train, bias_from_state


def _numba_disabled() -> bool:
    return os.environ.get("CVPOOL_DISABLE_NUMBA", "").strip().lower() in (
        "1",
        "true",
        "yes",
        "on",
    )


smo_train_python, bias_from_state_python = _build_kernels(lambda f: f)

BACKEND = "python"
if not _numba_disabled():
    try:
        from numba import njit
    except ImportError:
        smo_train, bias_from_state = smo_train_python, bias_from_state_python
    else:
        smo_train, bias_from_state = _build_kernels(njit(cache=True, nogil=True))
        BACKEND = "numba"
else:
    smo_train, bias_from_state = smo_train_python, bias_from_state_python
