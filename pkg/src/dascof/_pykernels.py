"""Pure-Python lattice kernels.

Reference twin of ``_ckernels.pyx``; both expose the same two functions and
must agree bit-for-bit on well-conditioned input.  Loops run over Python
scalars (not numpy element access), which is several times faster for the
small dimensions used here.
"""
import math


def _round(x):
    return math.floor(x + 0.5)


def clll_inplace(B, R, U, delta):
    """Complex LLL on the columns of ``B``, in place.

    ``R`` must be the upper-triangular factor of a QR decomposition of ``B``
    and ``U`` the identity (or any Gaussian-integer matrix tracked alongside).
    On return ``B`` is reduced, ``R`` is its triangular factor and ``U``
    collects the column operations.  Returns the number of swaps.
    """
    n, m = B.shape
    b = [[complex(B[i, k]) for k in range(m)] for i in range(n)]
    r = [[complex(R[i, k]) for k in range(m)] for i in range(m)]
    u = [[complex(U[i, k]) for k in range(m)] for i in range(m)]
    swaps = 0
    k = 1
    while k < m:
        for j in range(k - 1, -1, -1):
            mu = r[j][k] / r[j][j]
            qr, qi = _round(mu.real), _round(mu.imag)
            if qr == 0 and qi == 0:
                continue
            q = complex(qr, qi)
            for i in range(j + 1):
                r[i][k] -= q * r[i][j]
            for i in range(n):
                b[i][k] -= q * b[i][j]
            for i in range(m):
                u[i][k] -= q * u[i][j]
        rkk = r[k][k]
        rk1k = r[k - 1][k]
        rk1 = r[k - 1][k - 1]
        lhs = rkk.real * rkk.real + rkk.imag * rkk.imag + rk1k.real * rk1k.real + rk1k.imag * rk1k.imag
        if lhs < delta * (rk1.real * rk1.real + rk1.imag * rk1.imag):
            for row in b:
                row[k - 1], row[k] = row[k], row[k - 1]
            for row in u:
                row[k - 1], row[k] = row[k], row[k - 1]
            for row in r:
                row[k - 1], row[k] = row[k], row[k - 1]
            x = r[k - 1][k - 1]
            y = r[k][k - 1]
            nrm = math.sqrt(x.real * x.real + x.imag * x.imag + y.real * y.real + y.imag * y.imag)
            g00, g01 = x.conjugate() / nrm, y.conjugate() / nrm
            g10, g11 = -y / nrm, x / nrm
            for c in range(k - 1, m):
                t0, t1 = r[k - 1][c], r[k][c]
                r[k - 1][c] = g00 * t0 + g01 * t1
                r[k][c] = g10 * t0 + g11 * t1
            r[k][k - 1] = 0j
            swaps += 1
            k = max(k - 1, 1)
        else:
            k += 1
    for i in range(n):
        for c in range(m):
            B[i, c] = b[i][c]
    for i in range(m):
        for c in range(m):
            R[i, c] = r[i][c]
            U[i, c] = u[i][c]
    return swaps


def enum_ball(R, radius2, cap):
    """All nonzero integer ``w`` with ``||R w||^2 <= radius2``.

    ``R`` is real upper triangular with nonzero diagonal.  Schnorr-Euchner
    zig-zag order inside each level.  Returns ``(points, overflow)`` where
    ``points`` is a list of integer tuples; ``overflow`` is True when more
    than ``cap`` points were found (enumeration stops early).
    """
    d = R.shape[0]
    rr = [[float(R[i, j]) for j in range(d)] for i in range(d)]
    diag2 = [rr[i][i] * rr[i][i] for i in range(d)]
    w = [0] * d
    c = [0.0] * d
    dx = [0] * d
    ddx = [0] * d
    partial = [0.0] * (d + 1)
    out = []
    i = d - 1
    c[i] = 0.0
    w[i] = 0
    dx[i] = ddx[i] = 1
    while True:
        diff = w[i] - c[i]
        dist = partial[i + 1] + diag2[i] * diff * diff
        if dist <= radius2:
            if i == 0:
                if any(w):
                    out.append(tuple(w))
                    if len(out) > cap:
                        return out, True
                w[0] += dx[0]
                ddx[0] = -ddx[0]
                dx[0] = ddx[0] - dx[0]
            else:
                partial[i] = dist
                i -= 1
                s = 0.0
                row = rr[i]
                for j in range(i + 1, d):
                    s += row[j] * w[j]
                ci = -s / row[i]
                c[i] = ci
                wi = _round(ci)
                w[i] = wi
                if ci < wi:
                    dx[i] = ddx[i] = -1
                else:
                    dx[i] = ddx[i] = 1
        else:
            i += 1
            if i == d:
                return out, False
            w[i] += dx[i]
            ddx[i] = -ddx[i]
            dx[i] = ddx[i] - dx[i]
