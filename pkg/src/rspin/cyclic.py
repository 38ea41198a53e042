"""Exact arithmetic in the r-cyclic category.

Objects are written ``[n]_r`` (n >= 0, r >= 1).  A morphism ``[n]_r -> [m]_r``
is stored as the lift of a monotone degree-one circle map to the r-fold
cover: a tuple ``F(0..n)`` of integers with

    F(0) <= F(1) <= ... <= F(n) <= F(0) + (m+1),

extended to all of Z by F(i + (n+1)) = F(i) + (m+1).  Two lifts differing by
r*(m+1) describe the same morphism; the stored normal form has
0 <= F(0) < r*(m+1), which makes the identity's lift the literal inclusion
(0, 1, ..., n).

With these conventions the cyclic shift ``tau_n`` acts on underlying sets as
i -> i-1 (mod n+1); this is the unique choice compatible with the defining
relation tau_n . delta_0 = delta_n and with tau_n . sigma_0 = sigma_n . tau^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
import re


class CyclicError(ValueError):
    """Raised for ill-formed objects, lifts, or incomposable morphisms."""


@dataclass(frozen=True)
class CyclicObject:
    """The object [n]_r."""

    n: int
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise CyclicError(f"cover order must be positive, got r={self.r}")
        if self.n < 0:
            raise CyclicError(f"object index must be non-negative, got n={self.n}")

    @property
    def points(self) -> int:
        return self.n + 1

    def __str__(self):
        return f"[{self.n}]_{self.r}"


@dataclass(frozen=True)
class CyclicMorphism:
    """A morphism of the r-cyclic category in lift normal form."""

    source: CyclicObject
    target: CyclicObject
    lift: tuple[int, ...]

    def __post_init__(self):
        if self.source.r != self.target.r:
            raise CyclicError("source and target live over different covers")
        n, m = self.source.n, self.target.n
        F = self.lift
        if len(F) != n + 1:
            raise CyclicError(f"lift must have {n + 1} entries, got {len(F)}")
        for i in range(n):
            if F[i] > F[i + 1]:
                raise CyclicError(f"lift not monotone at position {i}: {F}")
        if F[n] > F[0] + (m + 1):
            raise CyclicError(f"lift exceeds one period: {F}")
        if not (0 <= F[0] < self.r * (m + 1)):
            raise CyclicError(f"lift not in normal form: {F}")

    @property
    def r(self) -> int:
        return self.source.r

    @staticmethod
    def from_lift(source: CyclicObject, target: CyclicObject,
                  lift: tuple[int, ...] | list[int]) -> "CyclicMorphism":
        """Build a morphism from any representative lift, renormalizing."""
        F = tuple(lift)
        period = source.r * (target.n + 1)
        shift = -(F[0] // period) * period if F else 0
        return CyclicMorphism(source, target, tuple(v + shift for v in F))

    def __call__(self, i: int) -> int:
        """Evaluate the periodic extension of the lift at any integer."""
        n1 = self.source.n + 1
        q, s = divmod(i, n1)
        return self.lift[s] + q * (self.target.n + 1)

    def underlying(self) -> tuple[int, ...]:
        """The underlying set map {0..n} -> {0..m} (reduce the lift mod m+1)."""
        m1 = self.target.n + 1
        return tuple(v % m1 for v in self.lift)

    def is_identity(self) -> bool:
        return self.source == self.target and self.lift == tuple(range(self.source.n + 1))

    def __mul__(self, other: "CyclicMorphism") -> "CyclicMorphism":
        """Composition self . other (other applied first)."""
        return compose(self, other)

    def inverse(self) -> "CyclicMorphism":
        """Inverse of an invertible morphism (a power of tau)."""
        if self.source.n != self.target.n:
            raise CyclicError("only endo-rotations are invertible")
        n = self.source.n
        u = self.underlying()
        if sorted(u) != list(range(n + 1)):
            raise CyclicError(f"morphism is not invertible: {self.lift}")
        # self = tau^t with t = -(F(0) - u0-position shift); recover t from F(0).
        t = self.lift[0] - 0  # lift of tau^t sends 0 to -t... F(0) = -t mod r(n+1)
        return tau_power(n, t, self.r)

    def __str__(self):
        return f"{self.source}->{self.target}:{self.lift}"


def identity(n: int, r: int) -> CyclicMorphism:
    obj = CyclicObject(n, r)
    return CyclicMorphism(obj, obj, tuple(range(n + 1)))


def compose(g: CyclicMorphism, f: CyclicMorphism) -> CyclicMorphism:
    """g . f, defined when target(f) = source(g)."""
    if f.target != g.source:
        raise CyclicError(f"cannot compose: {f.target} != {g.source}")
    return CyclicMorphism.from_lift(f.source, g.target, tuple(g(v) for v in f.lift))


def compose_all(*ms: CyclicMorphism) -> CyclicMorphism:
    """Compose left to right in diagrammatic order of application: ms[-1] first."""
    return reduce(compose, ms)


# ---------------------------------------------------------------------------
# generators


def delta(n: int, i: int, r: int) -> CyclicMorphism:
    """delta_i^n : [n-1]_r -> [n]_r, the monotone injection skipping i."""
    if not 0 <= i <= n or n < 1:
        raise CyclicError(f"delta index out of range: i={i}, n={n}")
    lift = tuple(j if j < i else j + 1 for j in range(n))
    return CyclicMorphism.from_lift(CyclicObject(n - 1, r), CyclicObject(n, r), lift)


def sigma(n: int, i: int, r: int) -> CyclicMorphism:
    """sigma_i^n : [n+1]_r -> [n]_r, the monotone surjection repeating i."""
    if not 0 <= i <= n:
        raise CyclicError(f"sigma index out of range: i={i}, n={n}")
    lift = tuple(j if j <= i else j - 1 for j in range(n + 2))
    return CyclicMorphism.from_lift(CyclicObject(n + 1, r), CyclicObject(n, r), lift)


def tau(n: int, r: int) -> CyclicMorphism:
    """tau_n : [n]_r -> [n]_r, the shift i -> i-1 on underlying sets."""
    return tau_power(n, 1, r)


def tau_inverse(n: int, r: int) -> CyclicMorphism:
    return tau_power(n, -1, r)


def tau_power(n: int, k: int, r: int) -> CyclicMorphism:
    """tau_n^k, stored directly as the shifted inclusion lift."""
    obj = CyclicObject(n, r)
    return CyclicMorphism.from_lift(obj, obj, tuple(j - k for j in range(n + 1)))


GENERATOR_KINDS = ("delta", "sigma", "tau", "tau_inverse")


def generator(kind: str, n: int, i: int | None, r: int) -> CyclicMorphism:
    """Named generator of Lambda_r; see module docstring for conventions."""
    if kind == "delta":
        return delta(n, i, r)
    if kind == "sigma":
        return sigma(n, i, r)
    if kind == "tau":
        return tau(n, r)
    if kind == "tau_inverse":
        return tau_inverse(n, r)
    raise CyclicError(f"unknown generator kind {kind!r}")


# ---------------------------------------------------------------------------
# the augmentation and pullback families


def phi_top(n: int, r: int) -> CyclicMorphism:
    """phi_n^n : [n]_r -> [1]_r with n -> 1 and everything else -> 0."""
    lift = tuple(0 if j < n else 1 for j in range(n + 1))
    return CyclicMorphism.from_lift(CyclicObject(n, r), CyclicObject(1, r), lift)


def phi_bottom(n: int, r: int) -> CyclicMorphism:
    """phi_n^0 : [n]_r -> [1]_r with 0 -> 0 and everything else -> 1."""
    lift = tuple(0 if j < 1 else 1 for j in range(n + 1))
    return CyclicMorphism.from_lift(CyclicObject(n, r), CyclicObject(1, r), lift)


def psi_top(n: int, k: int, r: int) -> CyclicMorphism:
    """psi_n^{k,n} = phi_n^n . tau_n^{k-n}; lift is 0..0 1 2..2 with 1 at k."""
    if not 0 <= k <= n:
        raise CyclicError(f"psi index out of range: k={k}, n={n}")
    lift = tuple(0 if j < k else (1 if j == k else 2) for j in range(n + 1))
    return CyclicMorphism.from_lift(CyclicObject(n, r), CyclicObject(1, r), lift)


def psi_bottom(n: int, k: int, r: int) -> CyclicMorphism:
    """psi_n^{k,0} = phi_n^0 . tau_n^k; lift is -1..-1 0 1..1 with 0 at k."""
    if not 0 <= k <= n:
        raise CyclicError(f"psi index out of range: k={k}, n={n}")
    lift = tuple(-1 if j < k else (0 if j == k else 1) for j in range(n + 1))
    return CyclicMorphism.from_lift(CyclicObject(n, r), CyclicObject(1, r), lift)


def theta(n: int, m: int, k: int, r: int) -> CyclicMorphism:
    """theta_n^{n,m,k} : [n+m-1]_r -> [n]_r, the pullback projection.

    The merged object is read as the (n+1)-gon word with the m sides of the
    (m+1)-gon spliced in at position k; the projection collapses the spliced
    block onto k.  The commutation relations with tau and the pullback
    property are verified in the test suite, which records this derivation.
    """
    if not 0 <= k <= n:
        raise CyclicError(f"theta index out of range: k={k}, n={n}")
    if n < 1 or m < 1:
        raise CyclicError(f"theta needs n, m >= 1, got n={n}, m={m}")
    lift = []
    for i in range(n + m):
        if i < k:
            lift.append(i)
        elif i < k + m:
            lift.append(k)
        else:
            lift.append(i - m + 1)
    return CyclicMorphism.from_lift(CyclicObject(n + m - 1, r), CyclicObject(n, r), tuple(lift))


SPECIAL_KINDS = ("phi_top", "phi_bottom", "psi_in", "psi_out", "theta")


def special(kind: str, *, n: int, r: int, k: int = 0, m: int = 0) -> CyclicMorphism:
    """Morphism families used by the graph model.

    ``psi_in`` is the staircase family psi_n^{k,n} (edge read against the
    face), ``psi_out`` the family psi_n^{k,0} (edge read with the face).
    """
    if kind == "phi_top":
        return phi_top(n, r)
    if kind == "phi_bottom":
        return phi_bottom(n, r)
    if kind == "psi_in":
        return psi_top(n, k, r)
    if kind == "psi_out":
        return psi_bottom(n, k, r)
    if kind == "theta":
        return theta(n, m, k, r)
    raise CyclicError(f"unknown special kind {kind!r}")


def underlying_set_map(f: CyclicMorphism) -> tuple[int, ...]:
    """Forgetful functor to Set: position i of the source goes to entry i."""
    return f.underlying()


# ---------------------------------------------------------------------------
# textual notation, for fixtures and debugging
#
#   tau^2 * psi(1,0) @ [3]_2        (rightmost atom applied first)
#   delta_1 * sigma_0 @ [2]_3
#   theta(2,2,1) @ [3]_2
#
# The rightmost atom carries the source object; each atom to its left has
# its source inferred from the previous target.

_ATOM_RE = re.compile(
    r"""^\s*(?:
        (?P<id>id) |
        tau(?:\^(?P<taupow>-?\d+))? |
        delta_(?P<dix>\d+) |
        sigma_(?P<six>\d+) |
        psi\(\s*(?P<pk>\d+)\s*,\s*(?P<pn>\d+)\s*\) |
        theta\(\s*(?P<tn>\d+)\s*,\s*(?P<tm>\d+)\s*,\s*(?P<tk>\d+)\s*\)
    )\s*$""",
    re.VERBOSE,
)

_OBJ_RE = re.compile(r"^\s*\[\s*(\d+)\s*\]_(\d+)\s*$")


def parse_object(text: str) -> CyclicObject:
    mo = _OBJ_RE.match(text)
    if not mo:
        raise CyclicError(f"cannot parse object {text!r}")
    return CyclicObject(int(mo.group(1)), int(mo.group(2)))


def _parse_atom(text: str, source: CyclicObject) -> CyclicMorphism:
    mo = _ATOM_RE.match(text)
    if not mo:
        raise CyclicError(f"cannot parse morphism atom {text!r}")
    n, r = source.n, source.r
    if mo.group("id"):
        return identity(n, r)
    if text.lstrip().startswith("tau"):
        power = int(mo.group("taupow")) if mo.group("taupow") else 1
        return tau_power(n, power, r)
    if mo.group("dix") is not None:
        return delta(n + 1, int(mo.group("dix")), r)
    if mo.group("six") is not None:
        return sigma(n - 1, int(mo.group("six")), r)
    if mo.group("pk") is not None:
        k, flavor = int(mo.group("pk")), int(mo.group("pn"))
        if flavor == 0:
            return psi_bottom(n, k, r)
        if flavor != n:
            raise CyclicError(f"psi({k},{flavor}) does not start at [{n}]_{r}")
        return psi_top(n, k, r)
    tn, tm, tk = int(mo.group("tn")), int(mo.group("tm")), int(mo.group("tk"))
    if tn + tm - 1 != n:
        raise CyclicError(f"theta({tn},{tm},{tk}) does not start at [{n}]_{r}")
    return theta(tn, tm, tk, r)


def parse_morphism(text: str) -> CyclicMorphism:
    """Parse the ``atom * ... * atom @ [n]_r`` notation."""
    if "@" not in text:
        raise CyclicError(f"morphism expression needs a source annotation: {text!r}")
    expr, _, obj_text = text.rpartition("@")
    source = parse_object(obj_text)
    atoms = [a for a in expr.split("*") if a.strip()]
    if not atoms:
        raise CyclicError(f"empty morphism expression: {text!r}")
    result = _parse_atom(atoms[-1], source)
    for atom_text in reversed(atoms[:-1]):
        result = compose(_parse_atom(atom_text, result.target), result)
    return result


def format_morphism(f: CyclicMorphism) -> str:
    """Render a morphism in the textual notation.

    Rotations and the psi families are recognized; anything else is written
    as an explicit staircase of delta/sigma/tau generators.
    """
    n, m, r = f.source.n, f.target.n, f.r
    if n == m:
        u = f.underlying()
        if sorted(u) == list(range(n + 1)):
            t = (-f.lift[0]) % (r * (n + 1))
            if t == 0:
                return f"id @ {f.source}"
            return f"tau^{t} @ {f.source}"
    if m == 1:
        for k in range(n + 1):
            base = psi_top(n, k, r)
            t = _right_tau_gap(f, base)
            if t is not None:
                suffix = "" if t == 0 else f" * tau^{t}"
                return f"psi({k},{n}){suffix} @ {f.source}"
            base = psi_bottom(n, k, r)
            t = _right_tau_gap(f, base)
            if t is not None and t != 0:
                return f"psi({k},0) * tau^{t} @ {f.source}"
            if t == 0:
                return f"psi({k},0) @ {f.source}"
    return " * ".join(_word(f)) + f" @ {f.source}"


def _right_tau_gap(f: CyclicMorphism, base: CyclicMorphism) -> int | None:
    """If f = base . tau^t, return t (in 0..r*(n+1)-1), else None."""
    n, r = f.source.n, f.r
    for t in range(r * (n + 1)):
        if compose(base, tau_power(n, t, r)) == f:
            return t
    return None


def _word(f: CyclicMorphism) -> list[str]:
    """Factor f as tau-power, then deltas, then sigmas (applied right to left)."""
    n, m, r = f.source.n, f.target.n, f.r
    # strip a rotation so the normalized map g fixes 0's fiber start
    g = f
    sigmas = []
    u = list(g.lift)
    # collapse repeats with sigmas
    i = 0
    src = n
    while i < len(u) - 1:
        if u[i] == u[i + 1]:
            sigmas.append(f"sigma_{i}")
            del u[i + 1]
            src -= 1
        else:
            i += 1
    # u is now strictly monotone of length src+1 mapping into [m]
    deltas = []
    shift = u[0]
    vals = [v - shift for v in u]
    expect = 0
    pos = 0
    tgt_seen = []
    for v in vals:
        tgt_seen.append(v)
    missing = [j for j in range(m + 1) if j not in [v % (m + 1) for v in vals]]
    for j in sorted(missing, reverse=True):
        deltas.append(f"delta_{j}")
    t = (-shift) % (r * (m + 1))
    parts = []
    if t:
        parts.append(f"tau^{t}")
    parts.extend(deltas)
    parts.extend(sigmas)
    if not parts:
        parts.append("id")
    return parts
