"""Sparse exact linear algebra over the scalar field.

Matrices are stored as ``{(row, col): Scalar}`` with zero entries absent;
vectors as ``{index: Scalar}``.  Everything is exact; Gaussian elimination
divides freely since scalars form a field.
"""

from __future__ import annotations

from .coeffs import ONE, ZERO, Scalar, scalar


class Mat:
    """Immutable sparse matrix over the scalar field."""

    __slots__ = ("nrows", "ncols", "data")

    def __init__(self, nrows: int, ncols: int, data: dict | None = None):
        self.nrows = nrows
        self.ncols = ncols
        clean = {}
        if data:
            for key, val in data.items():
                if val != ZERO:
                    clean[key] = val
        self.data = clean

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Mat":
        return cls(nrows, ncols, {})

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls(n, n, {(i, i): ONE for i in range(n)})

    @classmethod
    def from_rows(cls, rows) -> "Mat":
        data = {}
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        for i, row in enumerate(rows):
            for j, val in enumerate(row):
                val = scalar(val)
                if val != ZERO:
                    data[i, j] = val
        return cls(nrows, ncols, data)

    def to_rows(self) -> list[list[Scalar]]:
        return [
            [self.data.get((i, j), ZERO) for j in range(self.ncols)]
            for i in range(self.nrows)
        ]

    def entry(self, i: int, j: int) -> Scalar:
        return self.data.get((i, j), ZERO)

    def is_zero(self) -> bool:
        return not self.data

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Mat)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.nrows, self.ncols, frozenset(self.data.items())))

    def __add__(self, other: "Mat") -> "Mat":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        data = dict(self.data)
        for key, val in other.data.items():
            data[key] = data.get(key, ZERO) + val
        return Mat(self.nrows, self.ncols, data)

    def __sub__(self, other: "Mat") -> "Mat":
        return self + other.scale(-ONE)

    def __neg__(self) -> "Mat":
        return self.scale(-ONE)

    def scale(self, s) -> "Mat":
        s = scalar(s)
        if s == ZERO:
            return Mat.zeros(self.nrows, self.ncols)
        return Mat(self.nrows, self.ncols, {k: s * v for k, v in self.data.items()})

    def __mul__(self, other: "Mat") -> "Mat":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        by_row: dict[int, list] = {}
        for (k, j), val in other.data.items():
            by_row.setdefault(k, []).append((j, val))
        data: dict = {}
        for (i, k), aik in self.data.items():
            for j, bkj in by_row.get(k, ()):
                key = (i, j)
                data[key] = data.get(key, ZERO) + aik * bkj
        return Mat(self.nrows, other.ncols, data)

    def apply(self, vec: dict) -> dict:
        """Matrix times sparse column vector."""
        out: dict = {}
        for (i, j), val in self.data.items():
            vj = vec.get(j)
            if vj is not None:
                out[i] = out.get(i, ZERO) + val * vj
        return {i: v for i, v in out.items() if v != ZERO}

    def transpose(self) -> "Mat":
        return Mat(self.ncols, self.nrows, {(j, i): v for (i, j), v in self.data.items()})

    def flatten(self) -> dict:
        """Row-major sparse vector of length nrows*ncols."""
        return {i * self.ncols + j: v for (i, j), v in self.data.items()}

    def __repr__(self) -> str:
        return f"Mat({self.nrows}x{self.ncols}, nnz={len(self.data)})"


def kron_super(A: Mat, B: Mat, parity1: list[int], parity2: list[int]) -> Mat:
    """Matrix of A ((x)) B acting on the super tensor product.

    Basis vectors of the product are (j1, j2) in row-major order.  The
    Koszul rule (x (x) y)(v (x) w) = (-1)^{|y||v|} xv (x) yw is applied
    componentwise: the (i2, j2)-component of B has parity
    parity2[i2]+parity2[j2], so that factor picks up the sign
    (-1)^{(parity2[i2]+parity2[j2]) * parity1[j1]}.
    """
    n2, m2 = B.nrows, B.ncols
    data = {}
    for (i1, j1), x in A.data.items():
        p1 = parity1[j1]
        for (i2, j2), y in B.data.items():
            sgn = -ONE if (p1 and (parity2[i2] + parity2[j2]) % 2) else ONE
            data[i1 * n2 + i2, j1 * m2 + j2] = sgn * x * y
    return Mat(A.nrows * n2, A.ncols * m2, data)


def vec_sub_scaled(target: dict, src: dict, factor: Scalar) -> dict:
    """target - factor*src for sparse vectors."""
    out = dict(target)
    for k, v in src.items():
        val = out.get(k, ZERO) - factor * v
        if val == ZERO:
            out.pop(k, None)
        else:
            out[k] = val
    return out


class RowReducer:
    """Incremental echelon form for sparse vectors over the scalar field."""

    def __init__(self):
        self.pivots: dict[int, dict] = {}

    def reduce(self, vec: dict) -> dict:
        vec = dict(vec)
        while vec:
            lead = min(vec)
            row = self.pivots.get(lead)
            if row is None:
                return vec
            vec = vec_sub_scaled(vec, row, vec[lead])
        return vec

    def add(self, vec: dict) -> bool:
        """Insert a vector; returns True when it enlarges the span."""
        vec = self.reduce(vec)
        if not vec:
            return False
        lead = min(vec)
        inv = ONE / vec[lead]
        self.pivots[lead] = {k: inv * v for k, v in vec.items()}
        return True

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)

    @property
    def rank(self) -> int:
        return len(self.pivots)


def span_rank(vectors) -> int:
    red = RowReducer()
    for v in vectors:
        red.add(v)
    return red.rank


def joint_nullspace(mats: list[Mat], dim: int) -> list[dict]:
    """Basis of the common kernel of the given dim-column matrices."""
    red = RowReducer()
    for m in mats:
        rows: dict[int, dict] = {}
        for (i, j), val in m.data.items():
            rows.setdefault(i, {})[j] = val
        for row in rows.values():
            red.add(row)
    # Back-substitute: echelon rows (normalised, pivot coefficient 1).
    pivots = red.pivots
    pivot_cols = set(pivots)
    free_cols = [j for j in range(dim) if j not in pivot_cols]
    basis = []
    for free in free_cols:
        vec = {free: ONE}
        for col in sorted(pivot_cols, reverse=True):
            row = pivots[col]
            s = sum((v * vec.get(k, ZERO) for k, v in row.items() if k != col), start=ZERO)
            if s != ZERO:
                vec[col] = -s
        basis.append({k: v for k, v in vec.items() if v != ZERO})
    return basis


def solve_span(columns: list[dict], target: dict) -> list[Scalar] | None:
    """Solve sum_j x_j columns[j] = target exactly; None when unsolvable.

    Returns one solution vector (free coordinates set to zero).
    """
    red = RowReducer()
    tagged = []
    n = len(columns)
    # Augment each column with a unit tag so the combination can be read off.
    for j, col in enumerate(columns):
        aug = {2 * k: v for k, v in col.items()}
        aug[2 * j + 1 + 2 * 10**9] = ONE
        tagged.append(aug)
        red.add(aug)
    taug = {2 * k: v for k, v in target.items()}
    resid = red.reduce(taug)
    main = {k: v for k, v in resid.items() if k < 2 * 10**9}
    if main:
        return None
    sol = [ZERO] * n
    for k, v in resid.items():
        if k >= 2 * 10**9:
            j = (k - 1 - 2 * 10**9) // 2
            sol[j] = -v
    return sol


def operator_parity(m: Mat, parity: list[int]) -> int | None:
    """0/1 when the matrix is parity-homogeneous for the basis parity, else None."""
    seen = None
    for (i, j), _ in m.data.items():
        p = (parity[i] + parity[j]) % 2
        if seen is None:
            seen = p
        elif seen != p:
            return None
    return 0 if seen is None else seen
