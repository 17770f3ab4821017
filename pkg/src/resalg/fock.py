"""Truncated Fock-space realization of the canonical generators.

Each of the n modes keeps its lowest N number states.  The ladder operator a
acts as a|m> = sqrt(m)|m-1>, and

    Q = (a + a*) / sqrt(2),      P = (a - a*) / (i sqrt(2)).

Multi-mode operators are identity-padded tensor products with mode 1 as the
leftmost factor.  The truncation defect [Q_k, P_k] - i is a rank-one matrix
per mode with entry -iN at the top number state, so everything supported
below the boundary behaves canonically.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from resalg import symplectic
from resalg.expr import DomainError, Expr

# dense complex matrices throughout; keeps desk-scale memory in check
DEFAULT_MAX_DIM = 4096

_MAGIC = b"RAMX"
_DTYPE_TAG = b"c16\x00"


@dataclass(frozen=True)
class FockRep:
    """Immutable bundle of per-mode position/momentum matrices."""

    space: symplectic.SymplecticSpace
    levels: int
    position: tuple = field(repr=False)  # Q_k, full dimension
    momentum: tuple = field(repr=False)  # P_k, full dimension

    @property
    def modes(self) -> int:
        return self.space.modes

    @property
    def dim(self) -> int:
        return self.levels ** self.modes


def _ladder(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, levels)), 1).astype(complex)


def _pad(op: np.ndarray, mode: int, n: int, levels: int) -> np.ndarray:
    left = np.eye(levels ** mode)
    right = np.eye(levels ** (n - mode - 1))
    return np.kron(np.kron(left, op), right)


def build_rep(n: int, levels: int, max_dim: int = DEFAULT_MAX_DIM) -> FockRep:
    """Standard-form representation with n modes and `levels` states per mode."""
    if n < 1:
        raise ValueError("need at least one mode")
    if levels < 2:
        raise ValueError("need at least two levels per mode")
    if levels ** n > max_dim:
        raise ValueError(
            f"dimension {levels}**{n} exceeds the memory cap {max_dim}"
        )
    a = _ladder(levels)
    q1 = (a + a.conj().T) / np.sqrt(2.0)
    p1 = (a - a.conj().T) / (1j * np.sqrt(2.0))
    position = []
    momentum = []
    for k in range(n):
        qk = _pad(q1, k, n, levels)
        pk = _pad(p1, k, n, levels)
        qk.setflags(write=False)
        pk.setflags(write=False)
        position.append(qk)
        momentum.append(pk)
    return FockRep(
        space=symplectic.standard_space(n),
        levels=levels,
        position=tuple(position),
        momentum=tuple(momentum),
    )


def generator(rep: FockRep, f) -> np.ndarray:
    """Hermitian field generator G_f = sum_k f_{2k-1} Q_k + f_{2k} P_k."""
    fv = symplectic.as_vector(rep.space, f)
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for k in range(rep.modes):
        out += fv[2 * k] * rep.position[k]
        out += fv[2 * k + 1] * rep.momentum[k]
    return out


class ResolventSolver:
    """LU-factored (iz + G_f); applies the resolvent without forming it."""

    def __init__(self, rep: FockRep, z, f):
        z = complex(z)
        if z.real == 0.0:
            raise DomainError(f"resolvent parameter z={z} requires Re(z) != 0")
        self.z = z
        self.f = tuple(float(x) for x in f)
        self.dim = rep.dim
        mat = generator(rep, f).astype(complex)
        mat[np.diag_indices_from(mat)] += 1j * z
        self._matrix_a = mat
        self._lu = lu_factor(mat, check_finite=False)

    def apply(self, block: np.ndarray) -> np.ndarray:
        """Returns R @ block."""
        return lu_solve(self._lu, block, check_finite=False)

    def matrix(self) -> np.ndarray:
        out = self.apply(np.eye(self.dim, dtype=complex))
        self._check(out)
        return out

    def _check(self, res: np.ndarray):
        # probe residual: catches a broken solve at O(dim^2) cost
        probes = np.zeros((self.dim, 3), dtype=complex)
        probes[0, 0] = 1.0
        probes[-1, 1] = 1.0
        probes[:, 2] = 1.0 / np.sqrt(self.dim)
        err = np.linalg.norm(self._matrix_a @ (res @ probes) - probes)
        scale = max(1.0, abs(self.z))
        if err > 1e-10 * scale:
            cond_bound = (abs(self.z) + np.linalg.norm(self._matrix_a)) / abs(
                self.z.real
            )
            raise RuntimeError(
                f"resolvent solve failed: probe residual {err:.3e}, "
                f"condition estimate {cond_bound:.3e}"
            )


def resolvent_matrix(rep: FockRep, z, f) -> np.ndarray:
    """Dense resolvent (iz + G_f)^-1 via pivoted LU."""
    return ResolventSolver(rep, z, f).matrix()


def evaluate(rep: FockRep, e: Expr) -> np.ndarray:
    """Homomorphic evaluation of an expression; letters memoized per call."""
    cache = {}
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    eye = np.eye(rep.dim, dtype=complex)
    for coeff, word in e.terms:
        acc = eye
        for g in reversed(word):
            key = (g.z, g.f)
            if key not in cache:
                cache[key] = resolvent_matrix(rep, g.z, g.f)
            acc = cache[key] @ acc
        out += coeff * acc
    return out


def box_indices(rep: FockRep, cutoff: int) -> np.ndarray:
    """Indices of basis states with every mode level below `cutoff`."""
    if not 1 <= cutoff <= rep.levels:
        raise ValueError(f"cutoff must be in [1, {rep.levels}], got {cutoff}")
    idx = np.arange(rep.dim)
    keep = np.ones(rep.dim, dtype=bool)
    for k in range(rep.modes):
        keep &= (idx // rep.levels ** k) % rep.levels < cutoff
    return idx[keep]


def compress(rep: FockRep, m: np.ndarray, cutoff: int) -> np.ndarray:
    """Two-sided projection onto states with all mode levels below `cutoff`."""
    m = np.asarray(m)
    if m.shape != (rep.dim, rep.dim):
        raise ValueError(f"matrix shape {m.shape} does not match dim {rep.dim}")
    idx = box_indices(rep, cutoff)
    return m[np.ix_(idx, idx)]


@dataclass(frozen=True)
class SchurReport:
    """Result of probing whether an operator acts as a multiple of 1."""

    mean: complex
    max_deviation: float
    probes_used: int
    tolerance: float
    is_scalar: bool
    seed: int


def schur_constant(
    rep: FockRep,
    k: np.ndarray,
    cutoff: int,
    tol: float = 1e-8,
    seed: int = 0,
    random_probes: int = 10,
) -> SchurReport:
    """Rayleigh quotients <phi, K phi>/<phi, phi> over basis states below the
    cutoff plus seeded random unit vectors supported there."""
    k = np.asarray(k, dtype=complex)
    if k.shape != (rep.dim, rep.dim):
        raise ValueError(f"matrix shape {k.shape} does not match dim {rep.dim}")
    idx = box_indices(rep, cutoff)
    n_probes = len(idx) + random_probes
    probes = np.zeros((rep.dim, n_probes), dtype=complex)
    probes[idx, np.arange(len(idx))] = 1.0
    rng = np.random.default_rng(seed)
    for j in range(random_probes):
        phi = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
        probes[idx, len(idx) + j] = phi / np.linalg.norm(phi)
    applied = k @ probes  # one product for every probe column
    values = np.einsum("ij,ij->j", probes.conj(), applied)
    values /= np.einsum("ij,ij->j", probes.conj(), probes).real
    mean = complex(np.mean(values))
    max_dev = float(np.max(np.abs(values - mean)))
    return SchurReport(
        mean=mean,
        max_deviation=max_dev,
        probes_used=n_probes,
        tolerance=tol,
        is_scalar=max_dev <= tol,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# matrix container: 4-byte magic, 4-byte dtype tag, two uint64 dims (little
# endian), then row-major complex doubles


def save_matrix(path, m: np.ndarray):
    m = np.ascontiguousarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("only 2-d matrices are stored")
    header = _MAGIC + _DTYPE_TAG + struct.pack("<QQ", m.shape[0], m.shape[1])
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(m.astype("<c16").tobytes(order="C"))


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(24)
        if len(head) != 24 or head[:4] != _MAGIC:
            raise ValueError("not a matrix container file")
        if head[4:8] != _DTYPE_TAG:
            raise ValueError(f"unsupported dtype tag {head[4:8]!r}")
        rows, cols = struct.unpack("<QQ", head[8:24])
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != rows * cols:
        raise ValueError("container payload truncated")
    return data.reshape(rows, cols).astype(complex)


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "real": m.real.tolist(),
        "imag": m.imag.tolist(),
    }


def matrix_from_json(d: dict) -> np.ndarray:
    m = np.array(d["real"], dtype=float) + 1j * np.array(d["imag"], dtype=float)
    if m.shape != (d["rows"], d["cols"]):
        raise ValueError("matrix json shape mismatch")
    return m
