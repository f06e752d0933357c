"""Characters and infinitesimal characters of the tree Hopf algebra.

Values live in the truncated Laurent ring (coefficients may carry the
indeterminates ``t`` and ``s``).  A map is stored by its values on the
trees of a finite *basis*: a set of trees closed under taking the trunk
and pruned pieces of admissible cuts, e.g. all trees up to a degree cap, or
the generators of one of the small Hopf subalgebras.

Convolution uses pruned (x) trunk, so the right-hand factor of every
coproduct term is a single tree (or 1).  That keeps ``a * b`` computable
from tree values of ``b`` alone; ``a`` must be evaluated on forests, which
is free for characters and trivial for infinitesimal characters.
"""

from __future__ import annotations

import json
from functools import reduce

from gmpy2 import mpq

from .core.laurent import DEFAULT_WINDOW, LaurentElement, Window, minimal_subtraction
from .core.poly import MultiPoly
from .trees import Forest, HopfElement, RootedTree, antipode, enumerate_trees, forest_coproduct, tree_coproduct

__all__ = [
    "LinearForm",
    "Character",
    "InfChar",
    "BirkhoffPair",
    "NotClosed",
    "NotLocal",
    "BasisMismatch",
    "convolve",
    "inverse",
    "inverse_via_antipode",
    "lie_bracket",
    "star_exp",
    "star_log",
    "birkhoff",
    "birkhoff_via_inverse",
    "tilde_R",
    "tilde_R_inv",
    "scale_phi_s",
    "beta_tilde",
    "is_local",
    "beta_function",
    "adjoint_action",
    "evaluate_at_zero",
    "basis_for",
    "check_closed",
]


class NotClosed(ValueError):
    """A coproduct factor of a basis tree is missing from the basis."""


class NotLocal(ValueError):
    pass


class BasisMismatch(ValueError):
    pass


def basis_for(degree_cap: int = None, trees=None) -> tuple:
    if trees is None:
        if degree_cap is None:
            raise ValueError("need a degree cap or an explicit list of trees")
        trees = enumerate_trees(degree_cap)
    trees = tuple(sorted({RootedTree.parse(t) if isinstance(t, str) else t for t in trees},
                         key=RootedTree.sort_key))
    return trees


def check_closed(trees) -> None:
    """Raise :class:`NotClosed` unless every cut piece of every tree is in ``trees``."""
    have = set(trees)
    for t in trees:
        for (left, right), _ in tree_coproduct(t).items():
            for piece in tuple(left) + tuple(right):
                if piece not in have:
                    raise NotClosed(f"{piece} appears in the coproduct of {t} but is not in the basis")


def _laurent(x, window) -> LaurentElement:
    if isinstance(x, LaurentElement):
        if x.window != window:
            return x.rewindow(window)
        return x
    return LaurentElement({0: MultiPoly.coerce(x)}, window)


class LinearForm:
    """Linear map from the Hopf algebra to the Laurent ring.

    ``tree_values`` holds the values on basis trees, ``unit_value`` the value
    on the empty forest.  Values on larger forests come from ``forest_fn``
    (lazily, with a per-object cache).  Subclasses fix how forests evaluate.
    """

    kind = "linear"

    def __init__(self, basis, tree_values, window: Window = DEFAULT_WINDOW,
                 unit_value=None, forest_fn=None):
        self.basis = tuple(basis)
        self.window = Window(*window)
        self._index = frozenset(self.basis)
        vals = {}
        for t, v in tree_values.items():
            t = RootedTree.parse(t) if isinstance(t, str) else t
            if t not in self._index:
                raise BasisMismatch(f"tree {t} is not in the basis")
            v = _laurent(v, self.window)
            if v:
                vals[t] = v
        self.values = vals
        self.unit_value = _laurent(0 if unit_value is None else unit_value, self.window)
        self._forest_fn = forest_fn
        self._cache: dict = {}

    # evaluation ---------------------------------------------------------------
    def tree_value(self, tree: RootedTree) -> LaurentElement:
        if tree not in self._index:
            raise BasisMismatch(f"tree {tree} is not in the basis")
        return self.values.get(tree) or LaurentElement.zero(self.window)

    def value(self, forest) -> LaurentElement:
        if isinstance(forest, RootedTree):
            return self.tree_value(forest)
        if not forest:
            return self.unit_value
        if len(forest) == 1:
            return self.tree_value(forest[0])
        hit = self._cache.get(forest)
        if hit is None:
            hit = self._cache[forest] = self._forest_value(forest)
        return hit

    def _forest_value(self, forest: Forest) -> LaurentElement:
        if self._forest_fn is None:
            raise NotImplementedError("this linear form has no rule for forests")
        return self._forest_fn(forest)

    def __call__(self, x) -> LaurentElement:
        if isinstance(x, HopfElement):
            out = LaurentElement.zero(self.window)
            for f, c in x.terms.items():
                out = out + self.value(f) * c
            return out
        if isinstance(x, str):
            x = Forest.parse(x)
        return self.value(x)

    # algebra -----------------------------------------------------------------------
    def _same(self, other: "LinearForm"):
        if self.basis != other.basis:
            raise BasisMismatch("linear forms are defined on different bases")
        if self.window != other.window:
            raise BasisMismatch(f"windows differ: {self.window} vs {other.window}")

    def _combine(self, other, sign):
        self._same(other)
        keys = set(self.values) | set(other.values)
        vals = {t: self.tree_value(t) + other.tree_value(t) * sign for t in keys}
        unit = self.unit_value + other.unit_value * sign
        return LinearForm(self.basis, vals, self.window, unit,
                          lambda f: self.value(f) + other.value(f) * sign)

    def __add__(self, other):
        out = self._combine(other, 1)
        if isinstance(self, InfChar) and isinstance(other, InfChar):
            return InfChar(self.basis, out.values, self.window)
        return out

    def __sub__(self, other):
        out = self._combine(other, -1)
        if isinstance(self, InfChar) and isinstance(other, InfChar):
            return InfChar(self.basis, out.values, self.window)
        return out

    def scale(self, c):
        """Multiply by a scalar or polynomial."""
        c = c if isinstance(c, MultiPoly) else MultiPoly.coerce(c)
        vals = {t: v * c for t, v in self.values.items()}
        if isinstance(self, InfChar):
            return InfChar(self.basis, vals, self.window)
        return LinearForm(self.basis, vals, self.window, self.unit_value * c,
                          lambda f: self.value(f) * c)

    def map_values(self, fn):
        """Apply ``fn`` to every tree value (kind preserved for characters and infinitesimal ones)."""
        vals = {t: fn(v) for t, v in self.values.items()}
        return type(self)._rebuild(self, vals)

    @classmethod
    def _rebuild(cls, proto, vals):
        return LinearForm(proto.basis, vals, proto.window, proto.unit_value, None)

    def rewindow(self, window: Window):
        window = Window(*window)
        proto = _Proto(self.basis, window, self.unit_value.rewindow(window))
        return type(self)._rebuild(proto, {t: v.rewindow(window) for t, v in self.values.items()})

    def subs(self, assignment):
        return self.map_values(lambda v: v.subs(assignment))

    def equals(self, other) -> bool:
        """Equality of tree values (and unit value)."""
        self._same(other)
        return all(self.tree_value(t) == other.tree_value(t) for t in self.basis) and \
            self.unit_value == other.unit_value

    def __eq__(self, other):
        if not isinstance(other, LinearForm):
            return NotImplemented
        try:
            return self.equals(other)
        except BasisMismatch:
            return False

    __hash__ = None

    def is_holomorphic(self) -> bool:
        return all(v.is_holomorphic() for v in self.values.values())

    def variables(self) -> list[str]:
        names = set()
        for v in self.values.values():
            names.update(v.variables())
        return sorted(names)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "window": list(self.window),
            "basis": [t.code for t in self.basis],
            "values": {t.code: self.values[t].to_json() for t in self.basis if t in self.values},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def from_json(data):
        if isinstance(data, str):
            data = json.loads(data)
        window = Window(*data.get("window", DEFAULT_WINDOW))
        basis = basis_for(trees=data["basis"])
        vals = {RootedTree.parse(k): LaurentElement.from_json(v, window) for k, v in data["values"].items()}
        kind = data.get("kind", "character")
        if kind == "character":
            return Character(basis, vals, window)
        if kind == "infinitesimal":
            return InfChar(basis, vals, window)
        raise ValueError(f"cannot rebuild a linear form of kind {kind!r}")

    def __str__(self):
        parts = [f"{t.code}: {self.values[t]}" for t in self.basis if t in self.values]
        return f"{self.kind}{{" + "; ".join(parts) + "}"

    __repr__ = __str__


class _Proto:
    def __init__(self, basis, window, unit_value):
        self.basis = basis
        self.window = window
        self.unit_value = unit_value


class Character(LinearForm):
    """Unital algebra morphism; forests evaluate to products of tree values."""

    kind = "character"

    def __init__(self, basis, tree_values=None, window: Window = DEFAULT_WINDOW):
        super().__init__(basis, tree_values or {}, window, unit_value=1)

    def _forest_value(self, forest):
        return reduce(lambda a, b: a * b, (self.tree_value(t) for t in forest))

    @classmethod
    def _rebuild(cls, proto, vals):
        return Character(proto.basis, vals, proto.window)

    @classmethod
    def counit(cls, basis, window: Window = DEFAULT_WINDOW) -> "Character":
        return cls(basis, {}, window)


class InfChar(LinearForm):
    """Infinitesimal character: zero on 1 and on every product of two or more trees."""

    kind = "infinitesimal"

    def __init__(self, basis, tree_values=None, window: Window = DEFAULT_WINDOW):
        super().__init__(basis, tree_values or {}, window, unit_value=0)

    def _forest_value(self, forest):
        return LaurentElement.zero(self.window)

    @classmethod
    def _rebuild(cls, proto, vals):
        return InfChar(proto.basis, vals, proto.window)

    @classmethod
    def basis_element(cls, basis, tree, window: Window = DEFAULT_WINDOW) -> "InfChar":
        """``Z_T``: one on ``tree``, zero on every other tree."""
        tree = RootedTree.parse(tree) if isinstance(tree, str) else tree
        return cls(basis, {tree: 1}, window)


class BirkhoffPair:
    __slots__ = ("neg", "pos")

    def __init__(self, neg: Character, pos: Character):
        self.neg = neg
        self.pos = pos

    def recompose(self) -> Character:
        return convolve(inverse(self.neg), self.pos)

    def __iter__(self):
        return iter((self.neg, self.pos))


# -- convolution -------------------------------------------------------------------

def _conv_on(a: LinearForm, b: LinearForm, terms: dict) -> LaurentElement:
    out = LaurentElement.zero(a.window)
    for (left, right), c in terms.items():
        av = a.value(left)
        if not av:
            continue
        bv = b.value(right)
        if not bv:
            continue
        out = out + (av * bv) * c
    return out


def convolve(a: LinearForm, b: LinearForm) -> LinearForm:
    """``(a * b)(h) = <a (x) b, Delta h>``."""
    a._same(b)
    vals = {t: _conv_on(a, b, tree_coproduct(t)) for t in a.basis}
    if isinstance(a, Character) and isinstance(b, Character):
        return Character(a.basis, vals, a.window)
    return LinearForm(a.basis, vals, a.window, a.unit_value * b.unit_value,
                      lambda f: _conv_on(a, b, forest_coproduct(f)))


def _degree_order(basis):
    return sorted(basis, key=RootedTree.sort_key)


def inverse(phi: Character) -> Character:
    """Convolution inverse by degree recursion: ``psi(T) = -phi(T) - sum' phi(P) psi(R)``."""
    psi: dict = {}
    out = Character(phi.basis, {}, phi.window)
    for t in _degree_order(phi.basis):
        acc = -phi.tree_value(t)
        for (left, right), c in tree_coproduct(t).items():
            if not left or not right:
                continue
            acc = acc - (phi.value(left) * _partial_char_value(psi, right, phi.window)) * c
        psi[t] = acc
    out = Character(phi.basis, psi, phi.window)
    return out


def _partial_char_value(known: dict, forest: Forest, window) -> LaurentElement:
    out = LaurentElement.one(window)
    for t in forest:
        v = known.get(t)
        if v is None:
            return LaurentElement.zero(window)
        out = out * v
    return out


def inverse_via_antipode(phi: Character) -> Character:
    """Convolution inverse as ``phi o S`` (independent of the recursion in :func:`inverse`)."""
    vals = {t: phi(antipode(HopfElement.of(t))) for t in phi.basis}
    return Character(phi.basis, vals, phi.window)


def lie_bracket(z1: LinearForm, z2: LinearForm) -> InfChar:
    """``[Z, Z'] = Z * Z' - Z' * Z`` (an infinitesimal character again)."""
    a = convolve(z1, z2)
    b = convolve(z2, z1)
    vals = {t: a.tree_value(t) - b.tree_value(t) for t in z1.basis}
    return InfChar(z1.basis, vals, z1.window)


def _as_general(phi: LinearForm) -> LinearForm:
    return LinearForm(phi.basis, phi.values, phi.window, phi.unit_value, phi.value)


def star_exp(z: InfChar) -> Character:
    """``sum_k z^{*k} / k!``; finite because ``z^{*k}`` kills trees with fewer than k vertices."""
    top = max((t.degree for t in z.basis), default=0)
    total = {t: LaurentElement.zero(z.window) for t in z.basis}
    power: LinearForm = z
    fact = 1
    for k in range(1, top + 1):
        fact *= k
        for t in z.basis:
            total[t] = total[t] + power.tree_value(t) / fact
        if k < top:
            power = convolve(z, power)
    return Character(z.basis, total, z.window)


def star_log(phi: Character) -> InfChar:
    """Inverse of :func:`star_exp`: ``sum_k (-1)^(k+1) (phi - e)^{*k} / k``."""
    top = max((t.degree for t in phi.basis), default=0)
    eps = Character.counit(phi.basis, phi.window)
    shifted = phi - eps
    total = {t: LaurentElement.zero(phi.window) for t in phi.basis}
    power: LinearForm = shifted
    for k in range(1, top + 1):
        sign = 1 if k % 2 else -1
        for t in phi.basis:
            total[t] = total[t] + power.tree_value(t) * mpq(sign, k)
        if k < top:
            power = convolve(shifted, power)
    return InfChar(phi.basis, total, phi.window)


def adjoint_action(g: Character, z: LinearForm) -> InfChar:
    """``Ad(g) Z = g * Z * g^-1`` on tree values."""
    inner = convolve(z, inverse(g))
    outer = convolve(g, inner)
    return InfChar(z.basis, outer.values, z.window)


# -- Birkhoff factorization ----------------------------------------------------------

def birkhoff(phi: Character) -> BirkhoffPair:
    """``phi = neg^-1 * pos`` with ``neg`` pure poles and ``pos`` holomorphic.

    Degree recursion: ``bar(T) = phi(T) + sum' neg(P) phi(R)``, then
    ``neg(T) = -pi(bar(T))`` and ``pos(T) = bar(T) - pi(bar(T))``.
    """
    neg: dict = {}
    pos: dict = {}
    for t in _degree_order(phi.basis):
        bar = phi.tree_value(t)
        for (left, right), c in tree_coproduct(t).items():
            if not left or not right:
                continue
            bar = bar + (_partial_char_value(neg, left, phi.window) * phi.value(right)) * c
        pole, hol = minimal_subtraction(bar)
        neg[t] = -pole
        pos[t] = hol
    return BirkhoffPair(Character(phi.basis, neg, phi.window), Character(phi.basis, pos, phi.window))


def birkhoff_via_inverse(phi: Character) -> BirkhoffPair:
    """Independent factorization route.

    Build ``v`` holomorphic with ``phi * v = u`` pure-pole, by
    ``u(T) + v(T) = ...`` splitting ``w(T) = phi(T) + sum' phi(P) v(R)``
    into ``u(T) = pi(w)`` and ``v(T) = -(w - pi(w))``.  Then
    ``phi = u * v^-1`` so ``neg = u^-1`` and ``pos = v^-1``.
    """
    u: dict = {}
    v: dict = {}
    for t in _degree_order(phi.basis):
        w = phi.tree_value(t)
        for (left, right), c in tree_coproduct(t).items():
            if not left or not right:
                continue
            w = w + (phi.value(left) * _partial_char_value(v, right, phi.window)) * c
        pole, hol = minimal_subtraction(w)
        u[t] = pole
        v[t] = -hol
    uc = Character(phi.basis, u, phi.window)
    vc = Character(phi.basis, v, phi.window)
    return BirkhoffPair(inverse(uc), inverse(vc))


# -- grading, scaling and beta ------------------------------------------------------

def tilde_R(phi: Character) -> InfChar:
    """``phi^-1 * (phi o Y)``."""
    graded = LinearForm(phi.basis, {t: v * t.degree for t, v in phi.values.items()}, phi.window,
                        0, lambda f: phi.value(f) * f.degree)
    out = convolve(inverse(phi), graded)
    return InfChar(phi.basis, out.values, phi.window)


def tilde_R_inv(L: InfChar) -> Character:
    """Solve ``phi o Y = phi * L`` degree by degree: ``n phi(T) = L(T) + sum' phi(P) L(R)``."""
    vals: dict = {}
    for t in _degree_order(L.basis):
        acc = L.tree_value(t)
        for (left, right), c in tree_coproduct(t).items():
            if not left or not right:
                continue
            acc = acc + (_partial_char_value(vals, left, L.window) * L.value(right)) * c
        vals[t] = acc / t.degree
    return Character(L.basis, vals, L.window)


def _exp_series(degree: int, window: Window, s_order=None) -> LaurentElement:
    # e^{s lam d}, kept up to lam^(hi - lo) so no product inside the window loses terms
    top = window.hi - min(window.lo, 0)
    if s_order is not None:
        top = min(top, s_order)
    coeffs = {}
    fact = 1
    for j in range(top + 1):
        if j:
            fact *= j
        coeffs[j] = MultiPoly.var("s", j) * mpq(degree ** j, fact) if j else MultiPoly.const(1)
    return LaurentElement(coeffs, window)


def scale_phi_s(phi: Character, s_order: int | None = None) -> Character:
    """``phi^s(T)(lam) = e^{s lam |T|} phi(T)(lam)``; ``s`` stays an indeterminate.

    ``s_order`` drops powers of ``s`` above it (enough for derivatives at 0).
    """
    series = {}
    vals = {}
    for t, v in phi.values.items():
        e = series.get(t.degree)
        if e is None:
            e = series[t.degree] = _exp_series(t.degree, phi.window, s_order)
        vals[t] = v * e
    return Character(phi.basis, vals, phi.window)


def _s_coefficient(form: LinearForm, k: int, kind):
    vals = {t: v.map(lambda p: p.coeff("s", k)) for t, v in form.values.items()}
    return kind(form.basis, vals, form.window)


def beta_tilde(phi: Character, check: bool = False) -> InfChar:
    """``d/ds|_0 (phi^-1 * phi^s)``, which equals ``lam * R~(phi)``.

    The derivative is read off the ``s^1`` coefficient.  With ``check`` the
    closed form is computed too and the two must agree.
    """
    scaled = scale_phi_s(phi, s_order=1)
    prod = convolve(inverse(phi), scaled)
    beta = _s_coefficient(prod, 1, InfChar)
    if check:
        closed = tilde_R(phi).map_values(lambda v: v.shift(1))
        if not beta.equals(closed):
            raise AssertionError("beta~ from the s-derivative differs from lam * R~(phi)")
    return beta


def _pole_bound(phi: Character) -> int:
    top = max((t.degree for t in phi.basis), default=1)
    ratio = max((mpq(v.pole_order(), t.degree) for t, v in phi.values.items()), default=mpq(0))
    return int(ratio * top) + 1


def _local_at(phi: Character, window: Window) -> tuple[bool, Character]:
    scaled = scale_phi_s(phi.rewindow(window))
    neg = birkhoff(scaled).neg
    ok = all("s" not in v.variables() for v in neg.values.values())
    return ok, neg


def is_local(phi: Character, window: Window | None = None, margin: int = 4) -> bool:
    """Exact test that the counterterms of ``phi^s`` do not depend on ``s``.

    The check runs on a window wide enough for every pole that the recursion
    can produce, then again on a window widened by ``margin``; both runs must
    agree, which guards against truncation artifacts.
    """
    if window is None:
        b = _pole_bound(phi)
        lo = min(-b, min((v.min_exponent() for v in phi.values.values()), default=0))
        window = Window(lo, b)
    ok1, neg1 = _local_at(phi, window)
    ok2, neg2 = _local_at(phi, Window(*window).enlarged(margin))
    if ok1 != ok2:
        raise ArithmeticError("locality verdict changed when the window was enlarged")
    if ok1:
        wide = neg2.window
        for t in phi.basis:
            if neg1.tree_value(t).rewindow(wide) != neg2.tree_value(t):
                raise ArithmeticError("counterterms changed when the window was enlarged")
    return ok1


def evaluate_at_zero(phi: LinearForm) -> LinearForm:
    """Keep only the ``lam^0`` coefficient (value at ``lam = 0`` for holomorphic input)."""
    return phi.map_values(lambda v: LaurentElement({0: v.coefficient(0)}, v.window))


def beta_function(phi: Character) -> InfChar:
    """``Ad(phi_+(0)) (beta~_phi at lam = 0)``; requires ``phi`` local."""
    if not is_local(phi):
        raise NotLocal("beta function is only defined for local characters")
    pos0 = evaluate_at_zero(birkhoff(phi).pos)
    beta0 = evaluate_at_zero(beta_tilde(phi))
    return adjoint_action(pos0, beta0)
