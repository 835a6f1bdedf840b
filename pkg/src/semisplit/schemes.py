"""Splitting coefficient tables.

A scheme with coefficients ``a``, ``b`` advances one step of size ``t`` as

    w_0 = u,  v_i = E_A(a_i t) w_{i-1},  w_i = E_B(b_i t, v_i),  i = 1..s,

so the first flow applied is always the kinetic one.
"""

from __future__ import annotations

from dataclasses import dataclass

CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class SplittingScheme:
    name: str
    order: int
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        if len(self.a) != len(self.b) or len(self.a) < 1:
            raise ValueError(f"scheme {self.name!r}: a and b need equal nonzero length")
        if self.order < 1:
            raise ValueError(f"scheme {self.name!r}: order must be positive")

    @property
    def stages(self) -> int:
        return len(self.a)


def check_consistency(scheme: SplittingScheme, tol: float = CONSISTENCY_TOL) -> bool:
    """True iff both coefficient sums equal one within ``tol``."""
    return abs(sum(scheme.a) - 1.0) <= tol and abs(sum(scheme.b) - 1.0) <= tol


_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)

_TABLES = {
    "lie": (1, (1.0,), (1.0,)),
    "strang": (2, (0.5, 0.5), (1.0, 0.0)),
    # Ruth (1983); kick/drift roles exchanged, which preserves the order
    "ruth3": (3, (7 / 24, 3 / 4, -1 / 24), (2 / 3, -2 / 3, 1.0)),
    # Yoshida (1990), symmetric 4th order
    "yoshida4": (
        4,
        (_W1 / 2, (_W0 + _W1) / 2, (_W0 + _W1) / 2, _W1 / 2),
        (_W1, _W0, _W1, 0.0),
    ),
    "auz5": (
        5,
        (
            0.475018345144539497,
            0.021856594741098449,
            -0.334948298035883491,
            0.512638174652696736,
            -0.011978701020553904,
            -0.032120004263046859,
            0.369533888781149572,
        ),
        (
            -0.402020995028838599,
            0.345821780864741783,
            0.400962967485371350,
            0.980926531879316517,
            -1.362064898669775625,
            0.923805029000837468,
            0.112569584468347105,
        ),
    ),
}

BUILTIN_SCHEMES = tuple(_TABLES)


def builtin_scheme(name: str) -> SplittingScheme:
    """Look up a named scheme: lie, strang, ruth3, yoshida4, auz5, or ``tj:<name>``.

    ``tj:`` prefixes compose with :func:`triple_jump`, so ``tj:tj:strang`` is the
    sixth-order reference method.
    """
    if name.startswith("tj:"):
        return triple_jump(builtin_scheme(name[3:]))
    try:
        order, a, b = _TABLES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; known: {', '.join(BUILTIN_SCHEMES)}") from None
    return SplittingScheme(name=name, order=order, a=a, b=b)


def triple_jump_weights(order: int) -> tuple[float, float, float]:
    g1 = 1.0 / (2.0 - 2.0 ** (1.0 / (order + 1)))
    return g1, 1.0 - 2.0 * g1, g1


def _flatten(a, b) -> list[tuple[str, float]]:
    flows = []
    for ai, bi in zip(a, b):
        flows.append(("A", ai))
        flows.append(("B", bi))
    return flows


def _merge(flows: list[tuple[str, float]]) -> list[tuple[str, float]]:
    merged: list[tuple[str, float]] = []
    for kind, c in flows:
        if c == 0.0:
            continue
        if merged and merged[-1][0] == kind:
            merged[-1] = (kind, merged[-1][1] + c)
        else:
            merged.append((kind, c))
    return merged


def _unflatten(flows: list[tuple[str, float]]) -> tuple[tuple[float, ...], tuple[float, ...]]:
    if flows and flows[0][0] == "B":
        flows = [("A", 0.0)] + flows
    if flows and flows[-1][0] == "A":
        flows = flows + [("B", 0.0)]
    a = tuple(c for kind, c in flows[0::2])
    b = tuple(c for kind, c in flows[1::2])
    return a, b


def triple_jump(base: SplittingScheme) -> SplittingScheme:
    """Symmetric triple-jump composition raising an even order p to p + 2.

    Three copies of ``base`` with step fractions (g1, 1 - 2 g1, g1),
    g1 = 1 / (2 - 2^(1/(p+1))); adjacent flows of the same kind are merged.
    """
    if base.order % 2:
        raise ValueError(f"triple jump needs an even-order base, {base.name!r} has order {base.order}")
    flows = []
    for gamma in triple_jump_weights(base.order):
        flows += [(kind, gamma * c) for kind, c in _flatten(base.a, base.b)]
    a, b = _unflatten(_merge(flows))
    return SplittingScheme(name=f"tj:{base.name}", order=base.order + 2, a=a, b=b)


def reference_scheme() -> SplittingScheme:
    """Sixth-order triple jump of a triple jump of Strang."""
    return triple_jump(triple_jump(builtin_scheme("strang")))

