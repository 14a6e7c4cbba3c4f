"""Definition-level computation of skew B/D coefficients in finite tensor products.

This module is the independent oracle: it knows nothing about closed
formulas.  It applies the four operators to finitary vectors of a
truncated tensor product of evaluation Verma modules by expanding the
2x2 matrix-product tensor rule column by column, tracking the shift of
the dynamic parameter by -2*eta*(weight of the already-processed
components), where the weight of e_k in a module of highest weight
Lambda is (Lambda - 2k).

Everything here is exponential-time and proud of it; intended scale is
a handful of columns and occupations.  The closed-form evaluators in
:mod:`dynirf.symfunc` are tested against these routines.
"""

from __future__ import annotations

from dataclasses import dataclass

from .special import InvalidParameterError
from .weights import WeightContext, weight

__all__ = [
    "FinitaryVector",
    "CapExceededError",
    "StabilizationError",
    "occupations_from_parts",
    "parts_from_occupations",
    "apply_operator",
    "skew_B_oracle",
    "skew_D_oracle",
    "c_matrix_element",
]

PRUNE_REL = 1e-15


class CapExceededError(RuntimeError):
    """An operator pushed a column occupation past the configured cap."""


class StabilizationError(RuntimeError):
    """The infinite-volume normalization failed to stabilize in depth."""


def occupations_from_parts(parts, n_cols: int) -> tuple:
    """Occupation tuple (m_0, ..., m_{n_cols-1}) of a signature's parts."""
    occ = [0] * n_cols
    for p in parts:
        if p < 0 or p >= n_cols:
            raise InvalidParameterError(f"part {p} outside column range 0..{n_cols - 1}")
        occ[p] += 1
    return tuple(occ)


def parts_from_occupations(occ) -> tuple:
    parts = []
    for col in range(len(occ) - 1, -1, -1):
        parts.extend([col] * occ[col])
    return tuple(parts)


@dataclass
class FinitaryVector:
    """Finite linear combination of occupation basis vectors.

    ``terms`` maps occupation tuples of fixed length ``n_cols`` to complex
    coefficients; terms smaller than PRUNE_REL of the largest magnitude
    are dropped on construction.
    """

    terms: dict
    n_cols: int
    cap: int = 8

    def __post_init__(self):
        self.prune()

    @classmethod
    def from_parts(cls, parts, n_cols: int, cap: int = 8) -> "FinitaryVector":
        return cls({occupations_from_parts(parts, n_cols): 1.0 + 0.0j}, n_cols, cap)

    def prune(self) -> None:
        if not self.terms:
            return
        peak = max(abs(c) for c in self.terms.values())
        cut = PRUNE_REL * peak
        self.terms = {occ: c for occ, c in self.terms.items() if abs(c) > cut}

    def coeff(self, parts) -> complex:
        return self.terms.get(occupations_from_parts(parts, self.n_cols), 0.0 + 0.0j)

    def total_occupation(self) -> int:
        levels = {sum(occ) for occ in self.terms}
        if len(levels) > 1:
            raise InvalidParameterError(f"mixed total occupations {levels}")
        return levels.pop() if levels else 0


_COL_IN = {"a": 0, "c": 0, "b": 1, "d": 1}
_ROW_OUT = {"a": 0, "b": 0, "c": 1, "d": 1}
_KIND = {(0, 0): "A", (1, 0): "B", (0, 1): "C", (1, 1): "D"}


def apply_operator(op: str, lam: complex, w: complex, v: FinitaryVector, params, col_offset: int = 0) -> FinitaryVector:
    """Apply one of a/b/c/d (with its own lambda, w) to a finitary vector.

    ``col_offset`` shifts which params columns back the tensor factors
    (the Verma module of factor j is column ``col_offset + j``); the skew
    functions use offset 0, the c-matrix elements offset 1.
    """
    if op not in _COL_IN:
        raise InvalidParameterError(f"unknown operator {op!r}")
    if col_offset + v.n_cols > params.n_cols:
        raise InvalidParameterError("parameter pack has too few columns for this vector")
    eta = params.eta
    mode = params.mode
    cols = [params.columns[col_offset + j] for j in range(v.n_cols)]
    global_in = _COL_IN[op]
    global_out = _ROW_OUT[op]

    out: dict = {}
    for occ, coeff in v.terms.items():
        # weight of the untouched prefix: sum (Lambda_i - 2 k_i) over i < j
        h_old = 0j
        prefix_weights = []
        for j in range(v.n_cols):
            prefix_weights.append(h_old)
            h_old += cols[j][1] - 2 * occ[j]
        # depth-first expansion over per-column branch choices
        stack = [(0, global_in, coeff, ())]
        while stack:
            j, carry, amp, new_prefix = stack.pop()
            if j == v.n_cols:
                if carry == global_out:
                    out[new_prefix] = out.get(new_prefix, 0.0 + 0.0j) + amp
                continue
            k = occ[j]
            z_j, lam_j = cols[j]
            # dynamic-parameter shift: processed components carry their
            # *new* occupations, which differ from the old ones by the
            # horizontal flux global_in - carry.
            lam_here = lam - 2 * eta * (prefix_weights[j] - 2 * global_in + 2 * carry)
            moves = []
            if carry == 0:
                moves.append(("A", k, 0))
                if k >= 1:
                    moves.append(("C", k - 1, 1))
            else:
                if k + 1 > v.cap:
                    raise CapExceededError(
                        f"occupation cap {v.cap} hit at column {j}; enlarge the vector cap"
                    )
                moves.append(("B", k + 1, 0))
                moves.append(("D", k, 1))
            for kind, k_new, carry_out in moves:
                ctx = WeightContext(lam_here, w, z_j, lam_j, eta, mode)
                amp_new = amp * weight(kind, k, ctx)
                if amp_new != 0:
                    stack.append((j + 1, carry_out, amp_new, new_prefix + (k_new,)))
    return FinitaryVector(out, v.n_cols, v.cap)


def skew_B_oracle(nu, mu, lam: complex, ws, params, cap: int = 8) -> complex:
    """Coefficient of E_nu in b(lam,w_1) b(lam+2eta,w_2) ... applied to E_mu.

    Computed in a finite tensor product with more columns than the largest
    part; the independence of the column count is asserted by recomputing
    with one extra column.
    """
    nu, mu = tuple(nu), tuple(mu)
    n = len(ws)
    if len(nu) != len(mu) + n:
        raise InvalidParameterError("need len(nu) = len(mu) + len(ws)")
    n_cols = max([p + 1 for p in (*nu, *mu)] + [1]) + 1

    def run(cols: int) -> complex:
        v = FinitaryVector.from_parts(mu, cols, cap)
        for j in range(n, 0, -1):
            v = apply_operator("b", lam + 2 * params.eta * (j - 1), ws[j - 1], v, params)
        return v.coeff(nu)

    val = run(n_cols)
    val2 = run(n_cols + 1)
    if abs(val - val2) > 1e-10 * max(1.0, abs(val)):
        raise StabilizationError("skew B coefficient depends on the column count")
    return val


def _normalized_d(lam_op: complex, w: complex, v: FinitaryVector, params) -> FinitaryVector:
    ell = v.total_occupation()
    out = apply_operator("d", lam_op, w, v, params)
    eta = params.eta
    depth = v.n_cols - 1
    norm = 1.0 + 0.0j
    for i in range(depth + 1):
        z_i, lam_i = params.columns[i]
        norm *= params.f(z_i - w + (lam_i + 1) * eta) / params.f(z_i - w + (-lam_i + 1) * eta)
    norm /= params.f(lam_op - 2 * eta * (params.lam_sum(0, depth + 1) - 2 * ell))
    return FinitaryVector({occ: c * norm for occ, c in out.terms.items()}, v.n_cols, v.cap)


def skew_D_oracle(nu, mu, lam: complex, ws, params, cap: int = 8) -> complex:
    """Coefficient of E_mu in the normalized d-string applied to E_nu.

    Uses finite depth max(nu_1, mu_1) + 1 and asserts stabilization against
    depth + 2 to 1e-10; failure signals inadmissible parameters rather than
    a soft warning.
    """
    nu, mu = tuple(nu), tuple(mu)
    if len(nu) != len(mu):
        raise InvalidParameterError("skew D needs len(nu) = len(mu)")
    n = len(ws)
    m = max([p for p in (*nu, *mu)] + [0]) + 1

    def run(cols: int) -> complex:
        v = FinitaryVector.from_parts(nu, cols, cap)
        for j in range(n, 0, -1):
            v = _normalized_d(lam + 2 * params.eta * (j - 1), ws[j - 1], v, params)
        return v.coeff(mu)

    val = run(m + 1)
    val2 = run(m + 3)
    if abs(val - val2) > 1e-10 * max(1.0, abs(val), abs(val2)):
        raise StabilizationError(
            f"skew D did not stabilize in depth: {val} vs {val2}"
        )
    return val2


def c_matrix_element(ws, ks, lam: complex, params, cap: int = 8) -> complex:
    """<c(w_1)...c(w_p) (e_{k_1} x ... x e_{k_m}), e_0 x ... x e_0>.

    The tensor factors live in columns 1..m of the parameter pack (no
    boundary column), and the composition carries the tilde-shifts
    lam, lam - 2*eta, ....  Returns 0 when sum(ks) != len(ws).
    """
    p = len(ws)
    ks = tuple(ks)
    if sum(ks) != p:
        return 0.0 + 0.0j
    v = FinitaryVector({ks: 1.0 + 0.0j}, len(ks), cap)
    for j in range(p, 0, -1):
        v = apply_operator("c", lam - 2 * params.eta * (j - 1), ws[j - 1], v, params, col_offset=1)
    return v.terms.get((0,) * len(ks), 0.0 + 0.0j)
