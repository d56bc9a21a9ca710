"""Gaussian integers and the finite field F_{p^2} = Z[j]/pZ[j].

Scalars are :class:`GaussianInt` / :class:`FqElem`.  Matrices over the field
are :class:`FqMatrix`, which stores the real and imaginary residues as two
``int64`` arrays with entries in ``[0, p)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "GaussianInt",
    "GaussianPrime",
    "FqElem",
    "FqMatrix",
    "ZeroInverse",
    "Singular",
    "InvalidPrime",
    "mod_p_reduce",
    "fq_inverse",
    "fq_rank",
    "fq_inverse_matrix",
    "fq_solve",
    "gaussian_det",
    "to_gaussian_array",
    "RowSpace",
]


class InvalidPrime(ValueError):
    """The modulus is not a rational prime congruent to 3 mod 4."""


class ZeroInverse(ZeroDivisionError):
    """Inverse of the zero element requested."""


class Singular(ArithmeticError):
    """Matrix is not invertible over F_{p^2}."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class GaussianInt:
    re: int
    im: int = 0

    def __post_init__(self):
        object.__setattr__(self, "re", int(self.re))
        object.__setattr__(self, "im", int(self.im))

    @classmethod
    def from_complex(cls, z) -> "GaussianInt":
        z = complex(z)
        if z.real != round(z.real) or z.imag != round(z.imag):
            raise ValueError(f"{z} is not a Gaussian integer")
        return cls(int(round(z.real)), int(round(z.imag)))

    def __add__(self, other):
        other = _as_gint(other)
        return GaussianInt(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianInt(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_as_gint(other))

    def __rsub__(self, other):
        return _as_gint(other) - self

    def __mul__(self, other):
        o = _as_gint(other)
        return GaussianInt(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def exact_div(self, other) -> "GaussianInt":
        """Division that must leave no remainder in Z[j]."""
        o = _as_gint(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian integer")
        num = self * o.conj()
        if num.re % n or num.im % n:
            raise ArithmeticError(f"{self} is not divisible by {o}")
        return GaussianInt(num.re // n, num.im // n)

    def is_unit(self) -> bool:
        return self.norm() == 1

    def __complex__(self):
        return complex(self.re, self.im)

    def __bool__(self):
        return bool(self.re or self.im)

    def __repr__(self):
        return f"GaussianInt({self.re}{self.im:+d}j)"


def _as_gint(x) -> GaussianInt:
    if isinstance(x, GaussianInt):
        return x
    if isinstance(x, (int, np.integer)):
        return GaussianInt(int(x), 0)
    return GaussianInt.from_complex(x)


@dataclass(frozen=True)
class GaussianPrime:
    """A rational prime p with p = 3 (mod 4), so that Z[j]/(p) is a field."""

    p: int

    def __post_init__(self):
        p = int(self.p)
        object.__setattr__(self, "p", p)
        if not _is_prime(p):
            raise InvalidPrime(f"p={p} is not prime")
        if p % 4 != 3:
            raise InvalidPrime(
                f"p={p} is not congruent to 3 mod 4; Z[j]/({p}) is not a field"
            )

    def __int__(self):
        return self.p


def _as_prime(p) -> GaussianPrime:
    return p if isinstance(p, GaussianPrime) else GaussianPrime(int(p))


@dataclass(frozen=True)
class FqElem:
    re: int
    im: int
    modulus: GaussianPrime

    def __post_init__(self):
        p = self.modulus.p
        object.__setattr__(self, "re", int(self.re) % p)
        object.__setattr__(self, "im", int(self.im) % p)

    @property
    def p(self) -> int:
        return self.modulus.p

    def _check(self, other: "FqElem"):
        if self.modulus != other.modulus:
            raise ValueError("field elements over different moduli")

    def __add__(self, other: "FqElem") -> "FqElem":
        self._check(other)
        return FqElem(self.re + other.re, self.im + other.im, self.modulus)

    def __sub__(self, other: "FqElem") -> "FqElem":
        self._check(other)
        return FqElem(self.re - other.re, self.im - other.im, self.modulus)

    def __neg__(self) -> "FqElem":
        return FqElem(-self.re, -self.im, self.modulus)

    def __mul__(self, other: "FqElem") -> "FqElem":
        self._check(other)
        return FqElem(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
            self.modulus,
        )

    def inverse(self) -> "FqElem":
        return fq_inverse(self)

    def __truediv__(self, other: "FqElem") -> "FqElem":
        return self * fq_inverse(other)

    def __bool__(self):
        return bool(self.re or self.im)

    def lift(self) -> GaussianInt:
        """The natural map g: representative with components in [0, p)."""
        return GaussianInt(self.re, self.im)

    def __repr__(self):
        return f"FqElem(({self.re},{self.im}) mod {self.p})"


def mod_p_reduce(z, p) -> FqElem:
    """Reduce a Gaussian integer modulo pZ[j]."""
    p = _as_prime(p)
    z = _as_gint(z)
    return FqElem(z.re, z.im, p)


def fq_inverse(x: FqElem) -> FqElem:
    """Multiplicative inverse, ``conj(x) / N(x)`` with N(x) = re^2 + im^2 mod p.

    For p = 3 mod 4, -1 is not a quadratic residue, so N(x) = 0 only for x = 0.
    """
    if not x:
        raise ZeroInverse("zero has no inverse in F_{p^2}")
    p = x.p
    n = (x.re * x.re + x.im * x.im) % p
    ninv = pow(n, p - 2, p)
    return FqElem(x.re * ninv, -x.im * ninv, x.modulus)


# -- matrices ---------------------------------------------------------------


def to_gaussian_array(a) -> np.ndarray:
    """Integer (re, im) pair array of shape ``a.shape + (2,)`` from integral input."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        re, im = np.rint(a.real), np.rint(a.imag)
        if not (np.array_equal(re, a.real) and np.array_equal(im, a.imag)):
            raise ValueError("array has non-integral entries")
        return np.stack([re.astype(np.int64), im.astype(np.int64)], axis=-1)
    if a.dtype.kind in "iu":
        return np.stack([a.astype(np.int64), np.zeros(a.shape, np.int64)], axis=-1)
    r = np.rint(a)
    if not np.array_equal(r, a):
        raise ValueError("array has non-integral entries")
    return np.stack([r.astype(np.int64), np.zeros(a.shape, np.int64)], axis=-1)


class FqMatrix:
    """Dense matrix over F_{p^2}.

    Parameters
    ----------
    re, im : array_like of int
        Real and imaginary residues; reduced into ``[0, p)`` on construction.
    p : int or GaussianPrime
    """

    __slots__ = ("re", "im", "modulus")

    def __init__(self, re, im, p):
        self.modulus = _as_prime(p)
        q = self.modulus.p
        re = np.mod(np.asarray(re, dtype=np.int64), q)
        im = np.mod(np.asarray(im, dtype=np.int64), q)
        if re.ndim != 2 or re.shape != im.shape:
            raise ValueError("FqMatrix needs two equally shaped 2-D arrays")
        re.setflags(write=False)
        im.setflags(write=False)
        self.re = re
        self.im = im

    # constructors
    @classmethod
    def from_gaussian(cls, a, p) -> "FqMatrix":
        """Entrywise reduction of an integer (or integral complex) matrix mod pZ[j]."""
        a = np.asarray(a)
        if a.ndim == 1:
            a = a[None, :]
        g = to_gaussian_array(a)
        return cls(g[..., 0], g[..., 1], p)

    @classmethod
    def identity(cls, n: int, p) -> "FqMatrix":
        return cls(np.eye(n, dtype=np.int64), np.zeros((n, n), np.int64), p)

    @classmethod
    def zeros(cls, rows: int, cols: int, p) -> "FqMatrix":
        z = np.zeros((rows, cols), np.int64)
        return cls(z, z, p)

    @classmethod
    def from_elements(cls, rows: Iterable[Iterable[FqElem]]) -> "FqMatrix":
        rows = [list(r) for r in rows]
        p = rows[0][0].modulus
        re = [[e.re for e in r] for r in rows]
        im = [[e.im for e in r] for r in rows]
        return cls(re, im, p)

    @property
    def p(self) -> int:
        return self.modulus.p

    @property
    def shape(self):
        return self.re.shape

    @property
    def rows(self) -> int:
        return self.re.shape[0]

    @property
    def cols(self) -> int:
        return self.re.shape[1]

    def __getitem__(self, idx):
        if isinstance(idx, tuple) and len(idx) == 2 and all(
            isinstance(i, (int, np.integer)) for i in idx
        ):
            return FqElem(self.re[idx], self.im[idx], self.modulus)
        re, im = self.re[idx], self.im[idx]
        if re.ndim == 1:
            # keep 2-D: a single row selection stays a row
            if isinstance(idx, tuple) and isinstance(idx[1], (int, np.integer)):
                re, im = re[:, None], im[:, None]
            else:
                re, im = re[None, :], im[None, :]
        return FqMatrix(re, im, self.modulus)

    def submatrix(self, rows, cols=None) -> "FqMatrix":
        rows = np.asarray(list(rows), dtype=np.intp)
        cols = np.arange(self.cols) if cols is None else np.asarray(list(cols), dtype=np.intp)
        return FqMatrix(
            self.re[np.ix_(rows, cols)].reshape(len(rows), len(cols)),
            self.im[np.ix_(rows, cols)].reshape(len(rows), len(cols)),
            self.modulus,
        )

    def element(self, i: int, j: int) -> FqElem:
        return FqElem(self.re[i, j], self.im[i, j], self.modulus)

    def lift(self) -> np.ndarray:
        """The natural map g applied entrywise, as a complex array."""
        return self.re + 1j * self.im

    def nonzero_mask(self) -> np.ndarray:
        return (self.re != 0) | (self.im != 0)

    def transpose(self) -> "FqMatrix":
        return FqMatrix(self.re.T, self.im.T, self.modulus)

    T = property(transpose)

    def _check(self, other: "FqMatrix"):
        if self.modulus != other.modulus:
            raise ValueError("matrices over different fields")

    def __add__(self, other: "FqMatrix") -> "FqMatrix":
        self._check(other)
        return FqMatrix(self.re + other.re, self.im + other.im, self.modulus)

    def __sub__(self, other: "FqMatrix") -> "FqMatrix":
        self._check(other)
        return FqMatrix(self.re - other.re, self.im - other.im, self.modulus)

    def __matmul__(self, other: "FqMatrix") -> "FqMatrix":
        self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        p = self.p
        # entries < p, so partial sums stay far below 2**63 for any practical p
        re = (self.re @ other.re - self.im @ other.im) % p
        im = (self.re @ other.im + self.im @ other.re) % p
        return FqMatrix(re, im, self.modulus)

    def scale_row(self, i: int, c: FqElem) -> "FqMatrix":
        re, im = self.re.copy(), self.im.copy()
        r, s = self.re[i], self.im[i]
        re[i] = r * c.re - s * c.im
        im[i] = r * c.im + s * c.re
        return FqMatrix(re, im, self.modulus)

    def __eq__(self, other):
        if not isinstance(other, FqMatrix):
            return NotImplemented
        return (
            self.modulus == other.modulus
            and self.shape == other.shape
            and np.array_equal(self.re, other.re)
            and np.array_equal(self.im, other.im)
        )

    def __hash__(self):
        return hash((self.p, self.re.tobytes(), self.im.tobytes(), self.shape))

    def __repr__(self):
        body = "\n".join(
            " ".join(f"({a},{b})" for a, b in zip(ra, rb)) for ra, rb in zip(self.re, self.im)
        )
        return f"FqMatrix(p={self.p}, shape={self.shape})\n{body}"


def _row_reduce(re: np.ndarray, im: np.ndarray, p: int, aug=None):
    """Gauss-Jordan elimination in place; returns the pivot columns.

    Pivot: first row (lowest index) at or below the current one with a
    nonzero entry in the current column.  ``aug`` is an optional (re, im)
    pair of right-hand sides transformed alongside.
    """
    rows, cols = re.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero((re[r:, c] != 0) | (im[r:, c] != 0))[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            re[[r, k]] = re[[k, r]]
            im[[r, k]] = im[[k, r]]
            if aug is not None:
                aug[0][[r, k]] = aug[0][[k, r]]
                aug[1][[r, k]] = aug[1][[k, r]]
        inv = _raw_inverse(int(re[r, c]), int(im[r, c]), p)
        _scale_rows(re, im, r, inv, p, aug)
        fr, fi = re[:, c].copy(), im[:, c].copy()
        fr[r] = 0
        fi[r] = 0
        targets = np.nonzero((fr != 0) | (fi != 0))[0]
        if targets.size:
            pr, pi = re[r].copy(), im[r].copy()
            re[targets] = (re[targets] - (np.outer(fr[targets], pr) - np.outer(fi[targets], pi))) % p
            im[targets] = (im[targets] - (np.outer(fr[targets], pi) + np.outer(fi[targets], pr))) % p
            if aug is not None:
                ar, ai = aug[0][r].copy(), aug[1][r].copy()
                aug[0][targets] = (aug[0][targets] - (np.outer(fr[targets], ar) - np.outer(fi[targets], ai))) % p
                aug[1][targets] = (aug[1][targets] - (np.outer(fr[targets], ai) + np.outer(fi[targets], ar))) % p
        pivots.append(c)
        r += 1
    return pivots


def _raw_inverse(a: int, b: int, p: int):
    n = (a * a + b * b) % p
    ninv = pow(n, p - 2, p)
    return (a * ninv) % p, (-b * ninv) % p


def _scale_rows(re, im, r, c, p, aug=None):
    cr, ci = c
    xr, xi = re[r].copy(), im[r].copy()
    re[r] = (xr * cr - xi * ci) % p
    im[r] = (xr * ci + xi * cr) % p
    if aug is not None:
        ar, ai = aug[0][r].copy(), aug[1][r].copy()
        aug[0][r] = (ar * cr - ai * ci) % p
        aug[1][r] = (ar * ci + ai * cr) % p


def fq_rank(M: FqMatrix) -> int:
    """Rank over F_{p^2} by exact Gaussian elimination."""
    re, im = M.re.copy(), M.im.copy()
    return len(_row_reduce(re, im, M.p))


def fq_solve(M: FqMatrix, rhs: FqMatrix) -> FqMatrix:
    """Solve ``M X = rhs`` for square, full-rank ``M``."""
    M._check(rhs)
    n = M.rows
    if M.cols != n:
        raise ValueError("fq_solve needs a square matrix")
    if rhs.rows != n:
        raise ValueError(f"rhs has {rhs.rows} rows, expected {n}")
    re, im = M.re.copy(), M.im.copy()
    aug = (rhs.re.copy(), rhs.im.copy())
    pivots = _row_reduce(re, im, M.p, aug)
    if len(pivots) < n:
        raise Singular(f"matrix has rank {len(pivots)} < {n}")
    return FqMatrix(aug[0], aug[1], M.modulus)


def fq_inverse_matrix(M: FqMatrix) -> FqMatrix:
    if M.rows != M.cols:
        raise Singular("non-square matrix has no inverse")
    return fq_solve(M, FqMatrix.identity(M.rows, M.modulus))


def gaussian_det(a) -> GaussianInt:
    """Exact determinant over Z[j] (fraction-free Bareiss elimination)."""
    g = to_gaussian_array(np.asarray(a))
    n = g.shape[0]
    if g.shape[:2] != (n, n):
        raise ValueError("determinant of a non-square matrix")
    m = [[GaussianInt(int(g[i, k, 0]), int(g[i, k, 1])) for k in range(n)] for i in range(n)]
    sign = 1
    prev = GaussianInt(1)
    for k in range(n - 1):
        if not m[k][k]:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return GaussianInt(0)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]).exact_div(prev)
        prev = m[k][k]
    det = m[n - 1][n - 1] if n else GaussianInt(1)
    return det if sign > 0 else -det


class RowSpace:
    """Incrementally grown row space over F_{p^2}.

    Keeps a reduced echelon basis so that testing whether a new row raises
    the rank costs one elimination pass against the stored pivots.
    """

    def __init__(self, n: int, p):
        self.modulus = _as_prime(p)
        self.n = n
        self._rows = []  # (pivot column, re, im) with a unit pivot

    @property
    def rank(self) -> int:
        return len(self._rows)

    def _reduce(self, re, im):
        p = self.modulus.p
        re = np.array(re, dtype=np.int64) % p
        im = np.array(im, dtype=np.int64) % p
        for c, br, bi in self._rows:
            fr, fi = int(re[c]), int(im[c])
            if fr or fi:
                re = (re - (fr * br - fi * bi)) % p
                im = (im - (fr * bi + fi * br)) % p
        return re, im

    def independent(self, re, im) -> bool:
        re, im = self._reduce(re, im)
        return bool(np.any(re) or np.any(im))

    def add(self, re, im) -> bool:
        """Insert a row; returns True iff it increased the rank."""
        p = self.modulus.p
        re, im = self._reduce(re, im)
        nz = np.flatnonzero((re != 0) | (im != 0))
        if nz.size == 0:
            return False
        c = int(nz[0])
        ir, ii = _raw_inverse(int(re[c]), int(im[c]), p)
        re, im = (re * ir - im * ii) % p, (re * ii + im * ir) % p
        # keep the stored basis fully reduced in the new pivot column
        for k, (c2, br, bi) in enumerate(self._rows):
            fr, fi = int(br[c]), int(bi[c])
            if fr or fi:
                self._rows[k] = (
                    c2,
                    (br - (fr * re - fi * im)) % p,
                    (bi - (fr * im + fi * re)) % p,
                )
        self._rows.append((c, re, im))
        return True
