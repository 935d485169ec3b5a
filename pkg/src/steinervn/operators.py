"""Commuting operator tuples realizing a Steiner polynomial on a graded basis.

The Hilbert space has an orthonormal basis organized as a shift tower:
a source vector e = e(), intermediate vectors e(j_1,...,j_m) indexed by
nondecreasing multisets of size m <= k-2, one vector f_i per variable, and a
sink g.  The operator T_l shifts e-levels up by appending l, maps the top
e-level into the f-layer using the polynomial's signed block structure, maps
f_l to g, and kills g.  All matrices are exact integer sparse matrices;
structural checks (commutation, Gram products, the evaluation identity) are
carried out in integer arithmetic with no rounding.

For triple systems (k = 3) each T_l has exactly one nonzero per column and
no two columns share a row, which certifies the operator norm 1 through the
Gram matrix.  For k >= 4 two blocks may share a (k-2)-set, producing Gram
off-diagonals and operator norms above 1; callers that need contractions
must normalize (see contraction_normalize).
"""

import math
from dataclasses import dataclass, replace
from itertools import combinations_with_replacement
from math import comb, inf

import numpy as np
from scipy import sparse

from .errors import ConvergenceError, DomainError, ValidationError
from .polynomials import SteinerPolynomial
from .seeding import rng_for

# Entry-magnitude budget before a product could overflow int64; products
# exceeding it are recomputed with Python integers.
_OVERFLOW_GUARD = 1 << 62
_POWER_SEED = 0x5EED


@dataclass
class HilbertBasis:
    """Canonical enumeration: e, e-levels by (size, lex), f_0..f_{n-1}, g."""

    n: int
    k: int
    vectors: list
    index: dict

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def e_vector(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[self.index[("e", ())]] = 1
        return v

    def g_index(self) -> int:
        return self.index[("g",)]


def build_basis(n: int, k: int) -> HilbertBasis:
    """Basis for the degree-k construction over n variables.

    Dimension is sum_{m=0}^{k-2} C(n+m-1, m) + n + 1, which is 2n+2 for k=3.
    Degenerate n < k is allowed (useful only with an empty block set).
    """
    if k < 3:
        raise DomainError(f"operator construction is defined for k >= 3, got k={k}")
    if n < 1:
        raise DomainError(f"need n >= 1, got n={n}")
    vectors = []
    for m in range(k - 1):
        for idx in combinations_with_replacement(range(n), m):
            vectors.append(("e", idx))
    vectors.extend(("f", i) for i in range(n))
    vectors.append(("g",))
    expected = sum(comb(n + m - 1, m) for m in range(k - 1)) + n + 1
    assert len(vectors) == expected
    return HilbertBasis(n, k, vectors, {v: i for i, v in enumerate(vectors)})


@dataclass
class IntSparseOperator:
    """Exact integer sparse matrix; storage never holds floats."""

    dim: int
    mat: sparse.csc_array

    @property
    def nnz(self) -> int:
        return self.mat.nnz

    def entries(self) -> list:
        """(row, col, value) triples sorted by column then row."""
        coo = self.mat.tocoo()
        triples = sorted(zip(coo.col.tolist(), coo.row.tolist(), coo.data.tolist()))
        return [(r, c, int(v)) for c, r, v in triples]

    def max_abs(self) -> int:
        if self.mat.nnz == 0:
            return 0
        return int(np.abs(self.mat.data).max())


def _from_triples(dim, rows, cols, vals) -> IntSparseOperator:
    mat = sparse.csc_array(
        (np.asarray(vals, dtype=np.int64), (np.asarray(rows), np.asarray(cols))),
        shape=(dim, dim),
    )
    mat.sum_duplicates()
    return IntSparseOperator(dim, mat)


@dataclass
class OperatorTuple:
    """n integer operators sharing one basis, plus a lazily applied scale.

    The scale multiplies each operator at evaluation time only: structure
    checks always run on the raw integer matrices.
    """

    basis: HilbertBasis
    ops: list
    polynomial: SteinerPolynomial
    scale: float = 1.0

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def k(self) -> int:
        return self.basis.k

    @property
    def dim(self) -> int:
        return self.basis.dim

    def with_scale(self, scale: float) -> "OperatorTuple":
        return replace(self, scale=float(scale))


def build_operators(p: SteinerPolynomial) -> OperatorTuple:
    """Operator tuple whose joint action encodes the polynomial's blocks.

    For each l:  T_l e(J) = e(sorted(J + l)) while |J| < k-2;  on the top
    level T_l e(J) = sign(B) f_i whenever J + l + i forms a block B (at most
    one i exists because the (k-1)-subsets of blocks never repeat);
    T_l f_i = delta_{li} g;  T_l g = 0.  Entries are all +-1.
    """
    system = p.system
    if system.t != system.k - 1:
        raise ValidationError(f"need t = k-1, got t={system.t}, k={system.k}")
    basis = build_basis(system.n, system.k)
    n, k = system.n, system.k

    # (k-1)-subset -> (completing element, sign); uniqueness is the Steiner property
    completion = {}
    for b_idx, block in enumerate(system.blocks):
        sign = int(p.signs[b_idx])
        for pos in range(k):
            sub = block[:pos] + block[pos + 1:]
            if sub in completion:
                raise ValidationError(
                    f"blocks {completion[sub][2]} and {b_idx} share the (k-1)-set {sub}"
                )
            completion[sub] = (block[pos], sign, b_idx)

    ops = []
    for l in range(n):
        rows, cols, vals = [], [], []
        for m in range(k - 2):
            for idx in combinations_with_replacement(range(n), m):
                col = basis.index[("e", idx)]
                row = basis.index[("e", tuple(sorted(idx + (l,))))]
                rows.append(row)
                cols.append(col)
                vals.append(1)
        for idx in combinations_with_replacement(range(n), k - 2):
            if l in idx or len(set(idx)) != len(idx):
                continue  # repeated index: no block is a multiset
            key = tuple(sorted(idx + (l,)))
            hit = completion.get(key)
            if hit is not None:
                i, sign, _ = hit
                rows.append(basis.index[("f", i)])
                cols.append(basis.index[("e", idx)])
                vals.append(sign)
        rows.append(basis.g_index())
        cols.append(basis.index[("f", l)])
        vals.append(1)
        ops.append(_from_triples(basis.dim, rows, cols, vals))
    return OperatorTuple(basis, ops, p)


# ---------------------------------------------------------------------------
# Exact integer products
# ---------------------------------------------------------------------------

def _product_bound(a: sparse.sparray, b: sparse.sparray) -> int:
    if a.nnz == 0 or b.nnz == 0:
        return 0
    max_a = int(np.abs(a.data).max())
    max_b = int(np.abs(b.data).max())
    terms = int(np.diff(a.tocsr().indptr).max())
    return max_a * max_b * terms


def checked_matmul(a, b):
    """Exact sparse integer product; verifies int64 cannot overflow."""
    if _product_bound(a, b) >= _OVERFLOW_GUARD:
        raise OverflowError(
            "integer sparse product could exceed 64-bit range; "
            "entries are larger than this construction ever produces"
        )
    return a @ b


def sparse_equal(a, b) -> bool:
    return (a - b).nnz == 0


@dataclass
class CommutationReport:
    ok: bool
    pair: tuple | None = None
    entry: tuple | None = None  # (row, col, difference) of first failure


def check_commuting(t: OperatorTuple) -> CommutationReport:
    """Exact check of T_l T_m = T_m T_l for all l < m."""
    for l in range(t.n):
        for m in range(l + 1, t.n):
            delta = checked_matmul(t.ops[l].mat, t.ops[m].mat) - checked_matmul(
                t.ops[m].mat, t.ops[l].mat
            )
            if delta.nnz:
                coo = delta.tocoo()
                order = np.lexsort((coo.col, coo.row))
                j = order[0]
                return CommutationReport(
                    False, (l, m), (int(coo.row[j]), int(coo.col[j]), int(coo.data[j]))
                )
    return CommutationReport(True)


@dataclass
class GramReport:
    is_diagonal_01: bool
    max_column_norm: int  # squared Euclidean column norm, exact integer
    offdiag_count: int


def gram_diagonal_check(t: OperatorTuple) -> list:
    """Exact Gram matrix T_l* T_l per operator.

    A diagonal Gram with entries in {0, 1} (and at least one 1) certifies
    operator norm exactly 1.
    """
    reports = []
    for op in t.ops:
        gram = checked_matmul(op.mat.T, op.mat).tocoo()
        off = int(np.count_nonzero(gram.row != gram.col))
        diag = gram.data[gram.row == gram.col]
        is01 = off == 0 and (diag.size == 0 or bool(np.all((diag == 0) | (diag == 1))))
        max_col = int(diag.max()) if diag.size else 0
        reports.append(GramReport(is01, max_col, off))
    return reports


# ---------------------------------------------------------------------------
# Floating-point norms (power iteration)
# ---------------------------------------------------------------------------

def _power_sqrt_norm(apply_gram, dim, tol, max_iters, rng, complex_field=False):
    """sqrt of the top eigenvalue of a Hermitian PSD operator given as a matvec.

    Stops when the eigenvalue residual drops below 0.5 * tol * lambda, which
    bounds the relative error of the returned square root by about tol.
    """
    if complex_field:
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    else:
        v = rng.standard_normal(dim)
    v = v / np.linalg.norm(v)
    lam = 0.0
    resid = np.inf
    for it in range(max_iters):
        w = apply_gram(v)
        lam = float(np.real(np.vdot(v, w)))
        resid = float(np.linalg.norm(w - lam * v))
        if resid <= 0.5 * tol * max(lam, 1e-300):
            return math.sqrt(max(lam, 0.0)), it + 1, v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0, it + 1, v
        v = w / nw
    raise ConvergenceError(
        f"power iteration did not converge in {max_iters} iterations",
        best_value=math.sqrt(max(lam, 0.0)),
        residual=resid,
    )


def operator_norm(a: IntSparseOperator, tol: float = 1e-9, max_iters: int = 100_000) -> float:
    """Spectral norm by power iteration on A*A with a fixed seeded start.

    The result is floored at the largest column Euclidean norm, which is an
    exact lower bound for any matrix.
    """
    if tol <= 0:
        raise DomainError(f"tol={tol} must be positive")
    if a.mat.nnz == 0:
        return 0.0
    A = a.mat.astype(np.float64).tocsr()
    At = A.T.tocsr()
    col_sq = np.asarray(A.multiply(A).sum(axis=0)).ravel()
    floor = math.sqrt(float(col_sq.max()))
    rng = rng_for(_POWER_SEED, "opnorm", a.dim, a.nnz)
    value, _, _ = _power_sqrt_norm(lambda v: At @ (A @ v), a.dim, tol, max_iters, rng)
    return max(value, floor)


def apply_polynomial(t: OperatorTuple, p: SteinerPolynomial, vector) -> np.ndarray:
    """sum_B sign(B) T_{b_1} ... T_{b_k} applied to a coefficient vector.

    Exact in integers when scale == 1 and the input is integral; otherwise
    float, with the result multiplied by scale^k.
    """
    if p.n != t.n or p.k != t.k:
        raise ValidationError(
            f"polynomial (n={p.n}, k={p.k}) incompatible with tuple (n={t.n}, k={t.k})"
        )
    vector = np.asarray(vector)
    if vector.shape != (t.dim,):
        raise ValidationError(f"vector has shape {vector.shape}, expected ({t.dim},)")
    exact = t.scale == 1.0 and np.issubdtype(vector.dtype, np.integer)
    acc = np.zeros(t.dim, dtype=np.int64 if exact else np.float64)
    work_dtype = np.int64 if exact else np.float64
    for block, sign in zip(p.system.blocks, p.signs):
        w = vector.astype(work_dtype)
        for j in block:
            w = t.ops[j].mat @ w
        acc += int(sign) * w if exact else float(sign) * w
    if t.scale != 1.0:
        acc = acc * t.scale ** t.k
    return acc


def assemble_polynomial_matrix(t: OperatorTuple, p: SteinerPolynomial):
    """Explicit integer matrix of sum_B sign(B) T_{b_1} ... T_{b_k} (scale 1)."""
    if p.n != t.n or p.k != t.k:
        raise ValidationError("polynomial incompatible with tuple")
    total = sparse.csc_array((t.dim, t.dim), dtype=np.int64)
    for block, sign in zip(p.system.blocks, p.signs):
        prod = t.ops[block[0]].mat
        for j in block[1:]:
            prod = checked_matmul(t.ops[j].mat, prod)
        total = total + int(sign) * prod
    return total


def polynomial_operator_norm(t: OperatorTuple, p: SteinerPolynomial, tol: float = 1e-9) -> float:
    """Spectral norm of p(T_1,...,T_n), including the tuple's scale^k.

    The number of blocks is an exact floor at scale 1: the matrix maps e to
    |S| g, so its largest column norm is at least |S|.
    """
    mat = assemble_polynomial_matrix(t, p)
    raw = operator_norm(IntSparseOperator(t.dim, mat), tol=tol)
    raw = max(raw, float(p.num_terms))
    return raw * t.scale ** t.k


def contraction_normalize(t: OperatorTuple, tol: float = 1e-9):
    """Rescale so every operator has norm at most 1.

    Returns (tuple, max_norm).  Norms within the power-iteration tolerance of
    1 count as contractive (k = 3 tuples over verified systems have norm
    exactly 1 and come back unchanged); genuine k >= 4 anomalies sit at
    sqrt(2) or higher and are rescaled.
    """
    nu = max(operator_norm(op, tol=tol) for op in t.ops)
    if nu <= 1.0 + 10.0 * tol:
        return t, nu
    return t.with_scale(t.scale / nu), nu


def linear_combination_sup(t: OperatorTuple, q, starts: int = 8, iters: int = 60,
                           seed: int = 0) -> float:
    """Estimated sup of ||sum_j alpha_j T_j|| over ||alpha||_{q'} = 1.

    Alternating maximization: for fixed alpha the top singular pair (u, v) of
    M(alpha) = sum_j alpha_j T_j comes from power iteration; for fixed (u, v)
    the optimal alpha aligns with s_j = <u, T_j v> by Hoelder equality.  Each
    half-step is nondecreasing in the bilinear value, and the reported value
    is the spectral norm at the final alpha (a certified lower bound of the
    sup).  Deterministic per seed; the tuple's scale multiplies the result.
    """
    if not (1 < q < inf):
        raise DomainError(f"need 1 < q < inf, got q={q}")
    qp = q / (q - 1.0)
    mats = [op.mat.astype(np.complex128).tocsr() for op in t.ops]
    rows, cols, data, opidx = [], [], [], []
    for j, op in enumerate(t.ops):
        coo = op.mat.tocoo()
        rows.append(coo.row)
        cols.append(coo.col)
        data.append(coo.data.astype(np.complex128))
        opidx.append(np.full(coo.nnz, j))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    opidx = np.concatenate(opidx)

    def assemble(alpha):
        return sparse.csr_array((data * alpha[opidx], (rows, cols)), shape=(t.dim, t.dim))

    def hoelder_align(s):
        mods = np.abs(s)
        if not mods.any():
            return None
        w = np.conj(s) * np.maximum(mods, 1e-300) ** (q - 2.0)
        w[mods == 0.0] = 0.0
        denom = float(np.sum(np.abs(w) ** qp)) ** (1.0 / qp)
        return w / denom

    best = 0.0
    for s_idx in range(starts):
        rng = rng_for(seed, "lincomb", s_idx)
        alpha = rng.standard_normal(t.n) + 1j * rng.standard_normal(t.n)
        denom = float(np.sum(np.abs(alpha) ** qp)) ** (1.0 / qp)
        alpha = alpha / denom
        sigma_prev = -1.0
        for _ in range(iters):
            M = assemble(alpha)
            Mh = M.conj().T.tocsr()
            sigma, _, v = _power_sqrt_norm(
                lambda x: Mh @ (M @ x), t.dim, 1e-10, 100_000, rng, complex_field=True
            )
            best = max(best, sigma)
            if sigma <= 0.0:
                break
            u = M @ v
            u = u / np.linalg.norm(u)
            svec = np.array([np.vdot(u, mat @ v) for mat in mats])
            alpha_new = hoelder_align(svec)
            if alpha_new is None:
                break
            alpha = alpha_new
            if abs(sigma - sigma_prev) <= 1e-11 * max(sigma, 1.0):
                break
            sigma_prev = sigma
    return best * t.scale


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def save_tuple(t: OperatorTuple, directory):
    """Write operators.txt and polynomial.txt under ``directory``.

    Header line: ``dim n k scale_num scale_den_exponent`` with
    scale = scale_num * n^(-scale_den_exponent).  Entry lines: l row col value.
    """
    import os

    from .polynomials import save_polynomial

    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "operators.txt"), "w", encoding="ascii") as fh:
        fh.write(f"{t.dim} {t.n} {t.k} {t.scale!r} 0.0\n")
        for l, op in enumerate(t.ops):
            for row, col, value in op.entries():
                fh.write(f"{l} {row} {col} {value}\n")
    save_polynomial(t.polynomial, os.path.join(directory, "polynomial.txt"))


def load_tuple(directory) -> OperatorTuple:
    import os

    from .polynomials import load_polynomial

    poly = load_polynomial(os.path.join(directory, "polynomial.txt"))
    path = os.path.join(directory, "operators.txt")
    with open(path, encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    head = lines[0].split()
    dim, n, k = int(head[0]), int(head[1]), int(head[2])
    scale = float(head[3]) * n ** (-float(head[4]))
    basis = build_basis(n, k)
    if basis.dim != dim:
        raise ValidationError(f"{path}: header dim {dim} != basis dim {basis.dim}")
    triples = [[] for _ in range(n)]
    for ln in lines[1:]:
        l, row, col, value = (int(x) for x in ln.split())
        triples[l].append((row, col, value))
    ops = []
    for l in range(n):
        if triples[l]:
            r, c, v = zip(*triples[l])
        else:
            r, c, v = (), (), ()
        ops.append(_from_triples(dim, r, c, v))
    return OperatorTuple(basis, ops, poly, scale)
