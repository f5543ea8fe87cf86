"""Parametrized real symmetric Hamiltonians.

Every model, built-in or parsed, is stored as an upper triangle of
polynomials in the parameters ``Q1..Qd``; the lower triangle mirrors it, so
evaluation is symmetric by construction.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .polynomial import Polynomial


@dataclass(frozen=True)
class HamiltonianModel:
    name: str
    n: int
    d: int
    entries: dict = field(repr=False)  # (i, j) with i <= j, 0-based -> Polynomial
    builtin: str = None
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        for (i, j), poly in self.entries.items():
            if not (0 <= i <= j < self.n):
                raise InvalidInput(f"entry ({i}, {j}) outside the upper triangle of a {self.n}x{self.n} matrix")
            if poly.d != self.d:
                raise InvalidInput(f"entry ({i}, {j}) has {poly.d} variables, model has {self.d}")

    def __call__(self, q):
        return eval_model(self, q)

    def entry(self, i, j):
        """Polynomial at 0-based position ``(i, j)`` (either triangle)."""
        if i > j:
            i, j = j, i
        return self.entries.get((i, j), Polynomial(self.d))

    def lipschitz_bound(self, radius):
        """Frobenius-norm Lipschitz bound on the box ``|Q_i| <= radius``."""
        total = 0.0
        for (i, j), poly in self.entries.items():
            w = 1.0 if i == j else 2.0
            total += w * poly.lipschitz_bound(radius) ** 2
        return float(np.sqrt(total))

    def describe(self):
        return {"name": self.name, "n": self.n, "d": self.d, "builtin": self.builtin, "constants": dict(self.constants)}


def eval_model(model: HamiltonianModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (model.d,):
        raise InvalidInput(f"model {model.name!r} takes {model.d} parameters, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise InvalidInput("parameter point has non-finite entries")
    h = np.zeros((model.n, model.n))
    for (i, j), poly in model.entries.items():
        v = poly(q)
        h[i, j] = v
        h[j, i] = v
    return h


def _poly(d, terms):
    return Polynomial(d, terms)


def builtin_e_epsilon(k=1.0, g=1.0) -> HamiltonianModel:
    """E x epsilon Jahn-Teller coupling matrix in Cartesian coordinates.

    With ``X = rho cos(theta)``, ``Y = rho sin(theta)`` the polar entries
    ``k rho cos(theta) + g rho^2 cos(2 theta) / 2`` and
    ``k rho sin(theta) - g rho^2 sin(2 theta) / 2`` become
    ``kX + g (X^2 - Y^2) / 2`` and ``kY - g X Y``.
    """
    k, g = float(k), float(g)
    diag = _poly(2, {(1, 0): k, (2, 0): 0.5 * g, (0, 2): -0.5 * g})
    off = _poly(2, {(0, 1): k, (1, 1): -g})
    return HamiltonianModel(
        name="e-epsilon",
        n=2,
        d=2,
        entries={(0, 0): diag, (0, 1): off, (1, 1): -diag},
        builtin="e-epsilon",
        constants={"k": k, "g": g},
    )


def builtin_t_tau2() -> HamiltonianModel:
    """Linear T x tau2 coupling matrix with parameters ``(X, Y, Z)``."""
    return HamiltonianModel(
        name="t-tau2",
        n=3,
        d=3,
        entries={
            (0, 1): Polynomial.variable(3, 2, -1.0),
            (0, 2): Polynomial.variable(3, 1, -1.0),
            (1, 2): Polynomial.variable(3, 0, -1.0),
        },
        builtin="t-tau2",
        constants={},
    )


# G x g coupling matrix: (row, col) -> coefficients of (g1, g2, g3, g4)
_GG_TABLE = {
    (0, 0): (0, 0, 1, 0),
    (0, 1): (0, 0, 0, 1),
    (0, 2): (1, 0, -1, 0),
    (0, 3): (0, 1, 0, 1),
    (1, 1): (0, 0, -1, 0),
    (1, 2): (0, -1, 0, 1),
    (1, 3): (1, 0, 1, 0),
    (2, 2): (-1, 0, 0, 0),
    (2, 3): (0, 1, 0, 0),
    (3, 3): (1, 0, 0, 0),
}


def builtin_g_g(coupling=1.0) -> HamiltonianModel:
    """Linear G x g coupling matrix on the four normal modes.

    ``coupling`` is the whole scalar prefactor in front of the bracketed
    matrix (physically ``-q k sqrt(2)``); only its value, not its
    factorisation, affects the eigenvectors.
    """
    c = float(coupling)
    entries = {}
    for pos, coeffs in _GG_TABLE.items():
        terms = {}
        for idx, a in enumerate(coeffs):
            if a:
                exps = [0, 0, 0, 0]
                exps[idx] = 1
                terms[tuple(exps)] = c * a
        entries[pos] = Polynomial(4, terms)
    return HamiltonianModel(name="g-g", n=4, d=4, entries=entries, builtin="g-g", constants={"coupling": c})


BUILTINS = {
    "e-epsilon": (builtin_e_epsilon, ("k", "g"), "E x epsilon Jahn-Teller (linear + quadratic)"),
    "t-tau2": (builtin_t_tau2, (), "T x tau2 Jahn-Teller (linear)"),
    "g-g": (builtin_g_g, ("coupling",), "G x g Jahn-Teller (linear)"),
}


def builtin(name, **constants) -> HamiltonianModel:
    try:
        factory, allowed, _ = BUILTINS[name]
    except KeyError:
        raise InvalidInput(f"unknown built-in model {name!r}; choose from {sorted(BUILTINS)}") from None
    kwargs = {k: v for k, v in constants.items() if k in allowed and v is not None}
    return factory(**kwargs)


def constant_model(matrix, d=2, name="constant") -> HamiltonianModel:
    """Parameter-independent model; handy as a control in tests."""
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    entries = {(i, j): Polynomial.constant(d, m[i, j]) for i in range(n) for j in range(i, n) if m[i, j] != 0}
    return HamiltonianModel(name=name, n=n, d=d, entries=entries)
