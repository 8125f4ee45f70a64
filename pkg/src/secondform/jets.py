"""Truncated multivariate Taylor-polynomial ("jet") arithmetic.

A :class:`Jet` stores the Taylor coefficients of a smooth function at a base
point, truncated at a fixed total degree.  Arithmetic on jets propagates
derivatives exactly (to roundoff), which is what the curvature pipelines need:
finite differences cannot deliver trustworthy third and fourth derivatives of
metric components at the tolerances used here.

Coefficients are stored as a numpy array of shape ``(n_monomials, *batch)``,
so a single jet can carry a whole grid of evaluation points at once.  All
operations broadcast over the batch axes; this is the main reason grid-sized
computations stay fast in pure Python.

Conventions
-----------
* Coefficients are monomial coefficients (the 1/k! is absorbed), so the
  partial derivative ``∂^α f`` equals ``coeff[α] * α!``.
* Jets of different variable counts never mix.  Jets of different truncation
  orders combine at the lower of the two orders.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

__all__ = [
    "JetSpace",
    "Jet",
    "jet_space",
    "seed_jets",
    "constant_like",
    "as_jet",
    "compose",
    "jdot",
    "jmatvec",
    "jmatmul",
    "jdet",
    "jinv",
    "jtrace",
]


def _monomials(nvars: int, order: int):
    """All exponent tuples with total degree <= order, sorted by (degree, lex).

    The sort guarantees that the monomial list of a lower-order space is a
    prefix of every higher-order space with the same nvars, which makes
    truncation a plain slice.
    """
    monos = []
    for deg in range(order + 1):
        degree_monos = set()
        for combo in combinations_with_replacement(range(nvars), deg):
            alpha = [0] * nvars
            for i in combo:
                alpha[i] += 1
            degree_monos.add(tuple(alpha))
        monos.extend(sorted(degree_monos))
    return monos


@lru_cache(maxsize=None)
def jet_space(nvars: int, order: int) -> "JetSpace":
    return JetSpace(nvars, order)


class JetSpace:
    """Precomputed index tables for one (nvars, order) truncation."""

    def __init__(self, nvars: int, order: int):
        if nvars < 0 or order < 0:
            raise ValueError("nvars and order must be nonnegative")
        self.nvars = nvars
        self.order = order
        self.monomials = _monomials(nvars, order)
        self.n = len(self.monomials)
        self.index = {m: k for k, m in enumerate(self.monomials)}
        self.degrees = np.array([sum(m) for m in self.monomials])
        # Multiplication table: all (i, j, k) with monomial_i + monomial_j = monomial_k.
        triples = []
        for i, mi in enumerate(self.monomials):
            di = sum(mi)
            for j, mj in enumerate(self.monomials):
                if di + sum(mj) > order:
                    continue
                mk = tuple(a + b for a, b in zip(mi, mj))
                triples.append((i, j, self.index[mk]))
        self._mult_triples = triples
        # Partial-derivative maps into the space one order down.
        self._diff_maps = []
        if order >= 1:
            lower = jet_space(nvars, order - 1)
            for v in range(nvars):
                src = np.empty(lower.n, dtype=np.intp)
                fac = np.empty(lower.n)
                for k, m in enumerate(lower.monomials):
                    bumped = tuple(a + (1 if i == v else 0) for i, a in enumerate(m))
                    src[k] = self.index[bumped]
                    fac[k] = m[v] + 1
                self._diff_maps.append((src, fac))
        self._factorials = np.array(
            [math.prod(math.factorial(a) for a in m) for m in self.monomials]
        )

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order})"


def _pad(c: np.ndarray, ndim: int) -> np.ndarray:
    """Append singleton batch axes so trailing batch dims line up."""
    return c.reshape(c.shape + (1,) * (ndim - c.ndim)) if c.ndim < ndim else c


def _pad_pair(a: np.ndarray, b: np.ndarray):
    ndim = max(a.ndim, b.ndim)
    return _pad(a, ndim), _pad(b, ndim)


class Jet:
    """Truncated Taylor polynomial with (optionally batched) coefficients."""

    __slots__ = ("space", "coeffs")
    __array_priority__ = 100  # make ndarray defer to Jet in mixed ops

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.coeffs = coeffs

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(space: JetSpace, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros((space.n,) + value.shape)
        coeffs[0] = value
        return Jet(space, coeffs)

    @staticmethod
    def variable(space: JetSpace, i: int, value) -> "Jet":
        jet = Jet.constant(space, value)
        if space.order >= 1:
            e_i = tuple(1 if k == i else 0 for k in range(space.nvars))
            jet.coeffs[space.index[e_i]] = 1.0
        return jet

    # -- inspection --------------------------------------------------------

    @property
    def value(self):
        return self.coeffs[0]

    @property
    def batch_shape(self):
        return self.coeffs.shape[1:]

    def deriv(self, alpha) -> np.ndarray:
        """Partial derivative ∂^α at the base point (alpha an exponent tuple)."""
        alpha = tuple(alpha)
        if sum(alpha) > self.space.order:
            raise ValueError(f"derivative {alpha} exceeds jet order {self.space.order}")
        k = self.space.index[alpha]
        return self.coeffs[k] * self.space._factorials[k]

    def truncate(self, order: int) -> "Jet":
        if order >= self.space.order:
            return self
        target = jet_space(self.space.nvars, order)
        return Jet(target, self.coeffs[: target.n])

    def partial(self, v: int) -> "Jet":
        """∂/∂x_v, landing in the space one order down."""
        if self.space.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        lower = jet_space(self.space.nvars, self.space.order - 1)
        src, fac = self.space._diff_maps[v]
        coeffs = self.coeffs[src] * fac.reshape((-1,) + (1,) * len(self.batch_shape))
        return Jet(lower, coeffs)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        """Return (a, b) as same-space jets, or None if not coercible."""
        if isinstance(other, Jet):
            if other.space.nvars != self.space.nvars:
                raise ValueError("cannot mix jets over different variable sets")
            order = min(self.space.order, other.space.order)
            return self.truncate(order), other.truncate(order)
        if isinstance(other, (int, float, np.floating, np.integer, np.ndarray)):
            return self, Jet.constant(self.space, other)
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        ac, bc = _pad_pair(a.coeffs, b.coeffs)
        return Jet(a.space, ac + bc)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        ac, bc = _pad_pair(a.coeffs, b.coeffs)
        return Jet(a.space, ac - bc)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer, np.ndarray)) and not isinstance(
            other, Jet
        ):
            arr = np.asarray(other, dtype=float)
            return Jet(self.space, _pad(self.coeffs, max(self.coeffs.ndim, arr.ndim + 1)) * arr)
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        out_shape = np.broadcast_shapes(a.batch_shape, b.batch_shape)
        out = np.zeros((a.space.n,) + out_shape)
        ac, bc = a.coeffs, b.coeffs
        for i, j, k in a.space._mult_triples:
            out[k] += ac[i] * bc[j]
        return Jet(a.space, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer, np.ndarray)) and not isinstance(
            other, Jet
        ):
            arr = np.asarray(other, dtype=float)
            return Jet(self.space, _pad(self.coeffs, max(self.coeffs.ndim, arr.ndim + 1)) / arr)
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return NotImplemented

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = Jet.constant(self.space, np.ones(self.batch_shape))
        base = self
        k = n
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- analytic functions --------------------------------------------------

    def _lift(self, scaled_derivs) -> "Jet":
        """Σ_k d_k · e^k with e the nilpotent part; d_k = f^(k)(a0)/k!."""
        e = Jet(self.space, self.coeffs.copy())
        e.coeffs[0] = np.zeros(self.batch_shape)
        out = Jet.constant(self.space, np.broadcast_to(scaled_derivs[0], self.batch_shape).copy())
        power = None
        for k in range(1, self.space.order + 1):
            power = e if power is None else power * e
            out = out + power * scaled_derivs[k]
        return out

    def reciprocal(self) -> "Jet":
        a0 = self.coeffs[0]
        derivs = [(-1.0) ** k / a0 ** (k + 1) for k in range(self.space.order + 1)]
        return self._lift(derivs)

    def sqrt(self) -> "Jet":
        a0 = self.coeffs[0]
        derivs, c = [], 1.0
        for k in range(self.space.order + 1):
            derivs.append(c * a0 ** (0.5 - k))
            c *= (0.5 - k) / (k + 1)
        return self._lift(derivs)

    def sqrt_abs(self) -> "Jet":
        """√|f|, valid where f does not cross zero on the batch."""
        return (self * np.sign(self.coeffs[0])).sqrt()

    def log_abs(self) -> "Jet":
        a0 = self.coeffs[0]
        derivs = [np.log(np.abs(a0))]
        for k in range(1, self.space.order + 1):
            derivs.append((-1.0) ** (k - 1) / (k * a0**k))
        return self._lift(derivs)

    def exp(self) -> "Jet":
        e0 = np.exp(self.coeffs[0])
        derivs = [e0 / math.factorial(k) for k in range(self.space.order + 1)]
        return self._lift(derivs)

    def sin(self) -> "Jet":
        s0, c0 = np.sin(self.coeffs[0]), np.cos(self.coeffs[0])
        cycle = [s0, c0, -s0, -c0]
        derivs = [cycle[k % 4] / math.factorial(k) for k in range(self.space.order + 1)]
        return self._lift(derivs)

    def cos(self) -> "Jet":
        s0, c0 = np.sin(self.coeffs[0]), np.cos(self.coeffs[0])
        cycle = [c0, -s0, -c0, s0]
        derivs = [cycle[k % 4] / math.factorial(k) for k in range(self.space.order + 1)]
        return self._lift(derivs)

    def sinh(self) -> "Jet":
        s0, c0 = np.sinh(self.coeffs[0]), np.cosh(self.coeffs[0])
        derivs = [(s0 if k % 2 == 0 else c0) / math.factorial(k) for k in range(self.space.order + 1)]
        return self._lift(derivs)

    def cosh(self) -> "Jet":
        s0, c0 = np.sinh(self.coeffs[0]), np.cosh(self.coeffs[0])
        derivs = [(c0 if k % 2 == 0 else s0) / math.factorial(k) for k in range(self.space.order + 1)]
        return self._lift(derivs)

    def arctan(self) -> "Jet":
        # derivatives of arctan via the recurrence on 1/(1+x^2)
        a0 = self.coeffs[0]
        derivs = [np.arctan(a0)]
        if self.space.order >= 1:
            w = 1.0 / (1.0 + a0**2)
            derivs.append(w)
        if self.space.order >= 2:
            derivs.append(-a0 * w**2)
        if self.space.order >= 3:
            derivs.append((3 * a0**2 - 1) * w**3 / 3.0)
        if self.space.order >= 4:
            derivs.append((a0 - a0**3) * w**4)
        if self.space.order >= 5:
            raise NotImplementedError("arctan jets implemented to order 4")
        return self._lift(derivs)

    def __repr__(self):
        return f"Jet(order={self.space.order}, nvars={self.space.nvars}, value={self.value!r})"


# -- helpers ---------------------------------------------------------------


def seed_jets(x, nvars: int, order: int):
    """Coordinate jets at base point(s) x of shape (..., nvars)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != nvars:
        raise ValueError(f"expected trailing dimension {nvars}, got {x.shape}")
    space = jet_space(nvars, order)
    return [Jet.variable(space, i, x[..., i]) for i in range(nvars)]


def as_jet(value, like: Jet) -> Jet:
    """Lift a scalar/array to a constant jet in the same space as `like`."""
    if isinstance(value, Jet):
        return value
    return Jet.constant(like.space, np.broadcast_to(np.asarray(value, dtype=float), like.batch_shape))


def constant_like(like: Jet, value) -> Jet:
    return as_jet(value, like)


def compose(outer: Jet, displacements) -> Jet:
    """Evaluate `outer` (a Taylor polynomial) on jet-valued displacements.

    `displacements` must have zero constant term; the result is the jet of
    the composed function, exact up to the common truncation order.
    """
    space = outer.space
    if len(displacements) != space.nvars:
        raise ValueError("wrong number of displacement jets")
    target = displacements[0].space
    prods = {0: None}  # monomial index -> jet of the power product (None = 1)
    out = Jet.constant(target, 0.0)
    for k, mono in enumerate(space.monomials):
        if k == 0:
            prod = None
        else:
            v = next(i for i, a in enumerate(mono) if a > 0)
            parent = tuple(a - (1 if i == v else 0) for i, a in enumerate(mono))
            pprod = prods[space.index[parent]]
            prod = displacements[v] if pprod is None else pprod * displacements[v]
            prods[k] = prod
        c = outer.coeffs[k]
        if np.all(c == 0.0):
            continue
        out = out + c if prod is None else out + prod * c
    return out


# -- small linear algebra over object arrays of jets ------------------------


def _obj(shape):
    return np.empty(shape, dtype=object)


def jdot(g, v, w):
    """Σ g[a][b] v[a] w[b] for an object matrix g and jet vectors v, w."""
    d = len(v)
    total = None
    for a in range(d):
        for b in range(d):
            term = g[a, b] * v[a] * w[b]
            total = term if total is None else total + term
    return total


def jmatvec(mat, v):
    d0, d1 = mat.shape
    out = _obj(d0)
    for i in range(d0):
        acc = None
        for j in range(d1):
            term = mat[i, j] * v[j]
            acc = term if acc is None else acc + term
        out[i] = acc
    return out


def jmatmul(a, b):
    n, k = a.shape
    k2, m = b.shape
    out = _obj((n, m))
    for i in range(n):
        for j in range(m):
            acc = None
            for s in range(k):
                term = a[i, s] * b[s, j]
                acc = term if acc is None else acc + term
            out[i, j] = acc
    return out


def jtrace(a):
    acc = None
    for i in range(a.shape[0]):
        acc = a[i, i] if acc is None else acc + a[i, i]
    return acc


def jdet(a):
    """Determinant by Laplace expansion; fine for the dims used here (<= 5)."""
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    if n == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    acc = None
    cols = list(range(n))
    for j in range(n):
        minor = a[np.ix_(range(1, n), [c for c in cols if c != j])]
        term = a[0, j] * jdet(minor)
        if j % 2 == 1:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def jinv(a):
    """Inverse via the adjugate (branch-free, jet-safe)."""
    n = a.shape[0]
    det = jdet(a)
    inv_det = det.reciprocal() if isinstance(det, Jet) else 1.0 / det
    out = _obj((n, n))
    if n == 1:
        out[0, 0] = inv_det
        return out
    rows = list(range(n))
    for i in range(n):
        for j in range(n):
            minor = a[np.ix_([r for r in rows if r != j], [c for c in rows if c != i])]
            cof = jdet(minor)
            if (i + j) % 2 == 1:
                cof = -cof
            out[i, j] = cof * inv_det
    return out
