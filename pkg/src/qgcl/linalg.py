"""Dense complex matrix kernel.

Everything downstream works with plain ``numpy.ndarray`` matrices of dtype
complex128.  This module supplies the operations the rest of the package is
built on: Kronecker products, partial traces, positivity tests in the Loewner
order, the canonical (Choi) matrix used to decide channel equality, and the
matrix text format shared by the CLI and the tests.

Two tolerances are fixed package-wide:

* ``TAU_EQ`` (1e-10) -- semantic equality of operators and channels.
* ``TAU_EXACT`` (1e-12) -- regression against exactly-known matrices.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ShapeError

TAU_EQ = 1e-10
TAU_EXACT = 1e-12

__all__ = [
    "TAU_EQ",
    "TAU_EXACT",
    "as_matrix",
    "dagger",
    "tensor",
    "permute_factors",
    "partial_trace",
    "factor_bra",
    "is_hermitian",
    "is_psd",
    "loewner_leq",
    "is_unitary",
    "is_density",
    "choi_of",
    "choi_residual",
    "parse_complex",
    "format_complex",
    "parse_matrix",
    "format_matrix",
]


def as_matrix(data) -> np.ndarray:
    """Coerce to a 2-d complex128 array and reject non-finite entries."""
    m = np.asarray(data, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ShapeError("matrix has non-finite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m.T)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a`` as the more significant factor."""
    return np.kron(a, b)


def permute_factors(m: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a square operator.

    ``m`` acts on factors of dimensions ``dims`` (in their current order);
    the result acts on the same factors listed in the new sequence ``order``,
    where ``order[k]`` is the current position of the factor that becomes
    position ``k``.
    """
    dims = list(dims)
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise DimensionError(f"invalid factor order {order!r}")
    d = int(np.prod(dims))
    if m.shape != (d, d):
        raise DimensionError(f"operator shape {m.shape} does not match dims {dims}")
    t = m.reshape(dims + dims)
    axes = list(order) + [n + k for k in order]
    new_dims = [dims[k] for k in order]
    return t.transpose(axes).reshape(d, d) if new_dims else t.reshape(d, d)


def partial_trace(m: np.ndarray, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the factors at positions ``traced``.

    ``m`` must be square on the tensor product of ``dims``.  The result acts
    on the remaining factors in their original order; the trace is preserved.
    """
    dims = list(dims)
    traced = sorted(set(traced))
    n = len(dims)
    d = int(np.prod(dims))
    if m.shape != (d, d):
        raise DimensionError(f"operator shape {m.shape} does not match dims {dims}")
    if any(t < 0 or t >= n for t in traced):
        raise DimensionError(f"traced factors {traced} out of range for {n} factors")
    keep = [k for k in range(n) if k not in traced]
    t = m.reshape(dims + dims)
    out_axes = keep + [n + k for k in keep]
    tr_axes = [(k, n + k) for k in traced]
    perm = out_axes + [a for pair in tr_axes for a in pair]
    t = t.transpose(perm)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    t = t.reshape([dk, dk] + [dims[k] for k in traced for _ in (0, 1)])
    for _ in traced:
        t = np.trace(t, axis1=2, axis2=3)
    return t.reshape(dk, dk)


def factor_bra(dims: Sequence[int], positions: Sequence[int],
               vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Matrix of ``(<v_1| ⊗ ... ⊗ <v_m| ⊗ I)`` contracting the given factors.

    ``dims`` lists all factor dimensions; the bras sit at ``positions`` (one
    vector per position) and identity acts on the rest.  The result maps the
    full space to the remaining factors, which keep their original order.
    Building blocks for trace-out maps and local-variable blocks.
    """
    dims = list(dims)
    n = len(dims)
    positions = list(positions)
    if len(positions) != len(list(vectors)):
        raise DimensionError("one vector per contracted position required")
    keep = [k for k in range(n) if k not in positions]
    bra = np.eye(1, dtype=complex)
    for pos, v in zip(positions, vectors):
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.size != dims[pos]:
            raise DimensionError(
                f"vector of size {v.size} contracted on factor of dim {dims[pos]}")
        bra = np.kron(bra, np.conj(v).reshape(1, -1))
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    m = np.kron(bra, np.eye(d_keep, dtype=complex))
    # columns of m are indexed by factors in order positions + keep; permute
    # the column factors back to 0..n-1 order
    col_order = positions + keep
    inv = [col_order.index(k) for k in range(n)]
    t = m.reshape([m.shape[0]] + [dims[k] for k in col_order])
    t = t.transpose([0] + [1 + p for p in inv])
    return t.reshape(m.shape[0], int(np.prod(dims)) if dims else 1)


def is_hermitian(m: np.ndarray, tol: float = TAU_EQ) -> bool:
    return m.shape[0] == m.shape[1] and np.abs(m - dagger(m)).max() <= tol


def _check_hermitian(m: np.ndarray, tol: float) -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got {m.shape}")
    dev = np.abs(m - dagger(m)).max()
    # Positivity tests tolerate slightly more asymmetry than the eigenvalue
    # tolerance itself, matching how these matrices are produced (sums of
    # short products of well-conditioned operators).
    if dev > max(tol, TAU_EQ) * 10:
        raise ShapeError(f"matrix is not Hermitian within tolerance (deviation {dev:.3e})")
    return (m + dagger(m)) / 2


def is_psd(m: np.ndarray, tol: float = TAU_EQ) -> bool:
    """Eigenvalue test: smallest eigenvalue >= -tol."""
    h = _check_hermitian(m, tol)
    if h.shape[0] == 0:
        return True
    return float(np.linalg.eigvalsh(h).min()) >= -tol


def loewner_leq(a: np.ndarray, b: np.ndarray, tol: float = TAU_EQ) -> bool:
    """a ⊑ b in the Loewner order: b - a is positive semidefinite."""
    if a.shape != b.shape:
        raise DimensionError(f"operands have different shapes {a.shape} vs {b.shape}")
    return is_psd(b - a, tol)


def is_unitary(m: np.ndarray, tol: float = TAU_EQ) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    return np.abs(dagger(m) @ m - np.eye(m.shape[0])).max() <= tol


def is_density(m: np.ndarray, tol: float = TAU_EQ) -> bool:
    return (
        m.shape[0] == m.shape[1]
        and abs(np.trace(m) - 1.0) <= tol
        and is_hermitian(m, tol)
        and is_psd(m, tol)
    )


def choi_of(kraus: Sequence[np.ndarray], dim_in: int | None = None, dim_out: int | None = None) -> np.ndarray:
    """Canonical channel matrix J = ∑_{ij} |i><j| ⊗ E(|i><j|).

    The input index is the first tensor factor.  Two Kraus lists define the
    same channel iff their Choi matrices agree.  An empty list is the abort
    channel and yields the zero matrix (dimensions must then be supplied).
    """
    kraus = list(kraus)
    if kraus:
        dim_out, dim_in = kraus[0].shape
        for k in kraus:
            if k.shape != (dim_out, dim_in):
                raise DimensionError("Kraus operators have mixed shapes")
    elif dim_in is None or dim_out is None:
        raise DimensionError("empty Kraus list needs explicit dimensions")
    j = np.zeros((dim_in * dim_out, dim_in * dim_out), dtype=complex)
    for k in kraus:
        v = k.T.reshape(-1, 1)  # vec with input index most significant
        j += v @ dagger(v)
    return j


def choi_residual(kraus_a: Sequence[np.ndarray], kraus_b: Sequence[np.ndarray],
                  dim_in: int | None = None, dim_out: int | None = None) -> float:
    """Max-abs entry of the difference of two Choi matrices.

    For a pair of single-Kraus (unitary-like) channels too large to
    materialize densely, returns a sound upper bound on the same quantity
    computed from the rank-2 structure J_a - J_b = vv† - ww†.
    """
    kraus_a = list(kraus_a)
    kraus_b = list(kraus_b)
    ref = kraus_a or kraus_b
    if ref:
        dim_out, dim_in = ref[0].shape
    if dim_in is None or dim_out is None:
        raise DimensionError("cannot infer channel dimensions")
    if dim_in * dim_out > 4096 and len(kraus_a) == 1 and len(kraus_b) == 1:
        v = kraus_a[0].T.reshape(-1)
        w = kraus_b[0].T.reshape(-1)
        ph = np.vdot(w, v)
        if abs(ph) > 0:
            w = w * (ph / abs(ph))
        d = np.abs(v - w).max()
        return float(2 * np.abs(w).max() * d + d * d)
    ja = choi_of(kraus_a, dim_in, dim_out)
    jb = choi_of(kraus_b, dim_in, dim_out)
    return float(np.abs(ja - jb).max())


# ---------------------------------------------------------------------------
# Matrix text format: first line "rows cols", then rows of entries such as
# "1", "-i", "0.5+0.5i", separated by whitespace.
# ---------------------------------------------------------------------------

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"""^(?:(?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?i)?
          |(?P<imonly>[+-]?(?:{_NUM})?i))$""",
    re.VERBOSE,
)


def parse_complex(token: str) -> complex:
    """Parse one entry of the matrix text format ("1", "-i", "0.5+0.5i")."""
    tok = token.strip().replace(" ", "")
    if not tok:
        raise ShapeError("empty complex literal")
    m = _COMPLEX_RE.match(tok)
    if not m:
        raise ShapeError(f"bad complex literal {token!r}")
    re_part = float(m.group("re")) if m.group("re") else 0.0
    im_part = 0.0
    imtok = m.group("im") or m.group("imonly")
    if imtok:
        imtok = imtok[:-1]  # strip trailing i
        if imtok in ("", "+"):
            im_part = 1.0
        elif imtok == "-":
            im_part = -1.0
        else:
            im_part = float(imtok)
    return complex(re_part, im_part)


def format_complex(z: complex, digits: int = 12) -> str:
    """Render in "a+bi" form with the given number of significant digits."""
    a = float(np.real(z)) + 0.0
    b = float(np.imag(z)) + 0.0
    fmt = f"%.{digits}g"
    if b == 0.0:
        return fmt % a
    istr = (fmt % b) + "i"
    if b > 0:
        istr = "+" + istr
    if a == 0.0:
        return istr if b < 0 else istr[1:]
    return (fmt % a) + istr


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ShapeError("empty matrix text")
    head = lines[0].split()
    if len(head) != 2:
        raise ShapeError(f"expected 'rows cols' header, got {lines[0]!r}")
    rows, cols = int(head[0]), int(head[1])
    entries = []
    for ln in lines[1:]:
        entries.extend(parse_complex(t) for t in ln.split())
    if len(entries) != rows * cols:
        raise ShapeError(f"expected {rows * cols} entries, got {len(entries)}")
    return np.array(entries, dtype=complex).reshape(rows, cols)


def format_matrix(m: np.ndarray, digits: int = 12) -> str:
    m = as_matrix(m)
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    for row in m:
        lines.append(" ".join(format_complex(z, digits) for z in row))
    return "\n".join(lines)
