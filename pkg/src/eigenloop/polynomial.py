"""Sparse multivariate polynomials with real coefficients."""


class Polynomial:
    """Immutable polynomial in ``d`` variables.

    ``terms`` maps exponent tuples (length ``d``) to coefficients.  Like terms
    are merged and zero coefficients dropped, so two polynomials compare equal
    exactly when their canonical term tables agree.
    """

    __slots__ = ("d", "terms", "_tree")

    def __init__(self, d, terms=None):
        self.d = int(d)
        merged = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.d:
                raise ValueError(f"exponent tuple {exps} does not have length {self.d}")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            merged[exps] = merged.get(exps, 0.0) + float(c)
        self.terms = {e: c for e, c in sorted(merged.items(), key=_term_key) if c != 0.0}
        self._tree = _horner_tree(list(self.terms.items()), 0, self.d)

    @classmethod
    def constant(cls, d, c):
        return cls(d, {(0,) * d: c})

    @classmethod
    def variable(cls, d, index, coeff=1.0):
        exps = [0] * d
        exps[index] = 1
        return cls(d, {tuple(exps): coeff})

    def __call__(self, x):
        return _eval_tree(self._tree, x, 0)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, tuple(self.terms.items())))

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(self.d, out)

    def __neg__(self):
        return Polynomial(self.d, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, s):
        return Polynomial(self.d, {e: s * c for e, c in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def lipschitz_bound(self, radius):
        """Upper bound on the gradient norm over the box ``|x_i| <= radius``."""
        total = 0.0
        for exps, c in self.terms.items():
            for i, e in enumerate(exps):
                if e:
                    total += abs(c) * e * radius ** (sum(exps) - 1)
        return total

    def format(self):
        if not self.terms:
            return "0"
        parts = []
        for k, (exps, c) in enumerate(self.terms.items()):
            sign = "-" if c < 0 else "+"
            body = repr(abs(c))
            for i, e in enumerate(exps):
                if e == 1:
                    body += f"*Q{i + 1}"
                elif e > 1:
                    body += f"*Q{i + 1}^{e}"
            if k == 0:
                parts.append(body if sign == "+" else "-" + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __repr__(self):
        return f"Polynomial({self.format()!r}, d={self.d})"


def _term_key(item):
    exps, _ = item
    return (sum(exps), tuple(-e for e in exps))


def _horner_tree(items, var, d):
    # Leaf: constant.  Node: list of (exponent, subtree) for variable `var`,
    # evaluated by Horner's rule from the highest exponent down.
    if var == d:
        return sum(c for _, c in items)
    groups = {}
    for exps, c in items:
        groups.setdefault(exps[var], []).append((exps, c))
    if not groups:
        return 0.0
    top = max(groups)
    return [(_horner_tree(groups[e], var + 1, d) if e in groups else 0.0) for e in range(top, -1, -1)]


def _eval_tree(node, x, var):
    if not isinstance(node, list):
        return node
    xv = x[var]
    acc = 0.0
    for sub in node:
        acc = acc * xv + _eval_tree(sub, x, var + 1)
    return acc

