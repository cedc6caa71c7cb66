"""Pure-Python SMO dual solver; reference twin of the compiled ``_smo`` kernel."""
import numpy as np

ALPHA_EPS = 1e-5
_MASK = (1 << 64) - 1


def _splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def smo_solve(K, y, C, tol, max_passes, seed):
    """Simplified SMO with an error cache and seeded partner selection.

    Returns ``(alpha, b, passes, converged)``; ``converged`` means a full sweep
    made no update: every remaining KKT violation beyond ``tol`` is
    too small to move an alpha by more than ``ALPHA_EPS``.
    """

    K = [list(map(float, row)) for row in np.asarray(K, dtype=float)]
    y = [float(v) for v in y]
    C = float(C)
    tol = float(tol)
    m = len(y)
    alpha = [0.0] * m
    err = [-v for v in y]
    b = 0.0
    state = int(seed) & _MASK
    passes = 0
    converged = False

    while passes < max_passes:
        changed = 0
        for i in range(m):
            ei = err[i]
            ri = y[i] * ei
            if not ((ri < -tol and alpha[i] < C) or (ri > tol and alpha[i] > 0.0)):
                continue
            for attempt in range(2):
                if attempt == 0:
                    # partner with the largest |E_i - E_j|, first index on ties
                    j = -1
                    best = -1.0
                    for k in range(m):
                        if k != i:
                            gap = abs(ei - err[k])
                            if gap > best:
                                best = gap
                                j = k
                else:
                    state, r = _splitmix64(state)
                    j = r % (m - 1)
                    if j >= i:
                        j += 1
                ej = err[j]
                ai_old = alpha[i]
                aj_old = alpha[j]
                if y[i] != y[j]:
                    lo = max(0.0, aj_old - ai_old)
                    hi = min(C, C + aj_old - ai_old)
                else:
                    lo = max(0.0, ai_old + aj_old - C)
                    hi = min(C, ai_old + aj_old)
                if lo == hi:
                    continue
                Ki, Kj = K[i], K[j]
                eta = 2.0 * Ki[j] - Ki[i] - Kj[j]
                if eta >= 0.0:
                    continue
                aj = aj_old - y[j] * (ei - ej) / eta
                if aj > hi:
                    aj = hi
                elif aj < lo:
                    aj = lo
                if abs(aj - aj_old) < ALPHA_EPS:
                    continue
                ai = ai_old + y[i] * y[j] * (aj_old - aj)
                # round-off can push ai a hair outside the box
                if ai < 0.0:
                    ai = 0.0
                elif ai > C:
                    ai = C
                dai = ai - ai_old
                daj = aj - aj_old
                b1 = b - ei - y[i] * dai * Ki[i] - y[j] * daj * Ki[j]
                b2 = b - ej - y[i] * dai * Ki[j] - y[j] * daj * Kj[j]
                if 0.0 < ai < C:
                    db = b1 - b
                elif 0.0 < aj < C:
                    db = b2 - b
                else:
                    db = (b1 + b2) / 2.0 - b
                alpha[i] = ai
                alpha[j] = aj
                b = b + db
                si = y[i] * dai
                sj = y[j] * daj
                for k in range(m):
                    err[k] = err[k] + (si * Ki[k] + sj * Kj[k] + db)
                changed += 1
                break
        passes += 1
        if changed == 0:
            converged = True
            break

    return np.asarray(alpha), b, passes, converged
