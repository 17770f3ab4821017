"""Numerical certification of the resolvent-family identities.

Each identity is turned into a residual: the spectral norm of a compressed
block of (left side - right side) evaluated at a ladder of truncation levels.
Identities that hold exactly in finite matrix algebra (pseudo-resolvent
difference, adjoint symmetry, zero-direction scalar, scaling covariance) must
sit at solver precision for every level.  Identities that involve two
non-commuting directions pick up boundary defects, so for those a convergence
protocol applies: residuals must not grow along the ladder (10% slack, with a
small absolute noise floor) and the final residual must clear the tolerance.

All checks are pure functions of immutable inputs and are independent of one
another; the suite merely runs them in a fixed order and merges the results.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, fields

import numpy as np

from resalg import fock, symplectic
from resalg.expr import DomainError, Expr, derivation, parse

FAMILY_ORDER = (
    "pseudo",
    "adjoint",
    "zero_vector",
    "rel_i",
    "rel_ii",
    "rel_iii",
    "rel_iv",
    "almost_inner",
)
EXACT_FAMILIES = frozenset({"pseudo", "adjoint", "zero_vector", "rel_iii"})

EXACT_TOL = 1e-9
CONVERGENCE_SLACK = 1.1
NOISE_FLOOR = 1e-12
SIGMA_CROSS_TOL = 1e-8

_PROBE_MONOMIAL = re.compile(r"^(I|[QP][0-9]+(\*[QP][0-9]+)*)$")


class ConfigError(ValueError):
    """Raised when a suite configuration is malformed."""


@dataclass(frozen=True)
class RelationCheck:
    """One certified identity: a residual per truncation level plus verdict."""

    relation: str
    params: dict
    truncations: tuple
    compression: int
    residuals: tuple
    tolerance: float
    verdict: bool
    seed: int = 0

    def __post_init__(self):
        if len(self.residuals) != len(self.truncations):
            raise ValueError("one residual per truncation level required")

    def to_report(self) -> dict:
        params = dict(self.params)
        params["compression"] = self.compression
        return {
            "relation": self.relation,
            "params": params,
            "truncations": [int(n) for n in self.truncations],
            "residuals": [float(r) for r in self.residuals],
            "tolerance": float(self.tolerance),
            "verdict": "pass" if self.verdict else "fail",
            "seed": int(self.seed),
        }


def _verdict(residuals, tol: float, exact: bool) -> bool:
    if not residuals:
        return False
    if any(math.isnan(r) or math.isinf(r) for r in residuals):
        return False
    if exact:
        return all(r <= tol for r in residuals)
    ok = residuals[-1] <= tol
    for prev, nxt in zip(residuals, residuals[1:]):
        if nxt > max(CONVERGENCE_SLACK * prev, NOISE_FLOOR):
            ok = False
    return ok


class SolverCache:
    """Per-representation memo of LU-factored resolvents and generators."""

    def __init__(self, rep: fock.FockRep):
        self.rep = rep
        self._solvers = {}
        self._generators = {}

    def solver(self, z, f) -> fock.ResolventSolver:
        key = (complex(z), tuple(float(x) for x in f))
        if key not in self._solvers:
            self._solvers[key] = fock.ResolventSolver(self.rep, key[0], key[1])
        return self._solvers[key]

    def generator(self, f) -> np.ndarray:
        key = tuple(float(x) for x in f)
        if key not in self._generators:
            self._generators[key] = fock.generator(self.rep, key)
        return self._generators[key]


def _as_caches(reps) -> list:
    if isinstance(reps, (fock.FockRep, SolverCache)):
        reps = [reps]
    return [r if isinstance(r, SolverCache) else SolverCache(r) for r in reps]


def _box_selector(rep: fock.FockRep, m: int):
    idx = fock.box_indices(rep, m)
    sel = np.zeros((rep.dim, len(idx)), dtype=complex)
    sel[idx, np.arange(len(idx))] = 1.0
    return idx, sel


def _block_norm(block: np.ndarray) -> float:
    return float(np.linalg.norm(block, 2))


def _sigma(space, rep, f, g) -> float:
    return symplectic.pair(space if space is not None else rep.space, f, g)


def _vec_param(f):
    return [float(x) for x in f]


def _scalar_param(z):
    z = complex(z)
    return z.real if z.imag == 0.0 else [z.real, z.imag]


# ---------------------------------------------------------------------------
# individual checks


def check_pseudo_resolvent(reps, f, lam, mu, m, tol=EXACT_TOL, seed=0):
    """R(lam,f) - R(mu,f) = i(mu-lam) R(lam,f) R(mu,f), exact in matrix algebra."""
    if complex(lam) == complex(mu):
        raise ValueError("pseudo-resolvent check needs two distinct parameters")
    caches = _as_caches(reps)
    residuals = []
    for cache in caches:
        idx, sel = _box_selector(cache.rep, m)
        a = cache.solver(lam, f)
        b = cache.solver(mu, f)
        block = a.apply(sel) - b.apply(sel)
        block -= 1j * (complex(mu) - complex(lam)) * a.apply(b.apply(sel))
        residuals.append(_block_norm(block[idx]))
    return RelationCheck(
        relation="pseudo",
        params={"f": _vec_param(f), "lambda": _scalar_param(lam), "mu": _scalar_param(mu)},
        truncations=tuple(c.rep.levels for c in caches),
        compression=m,
        residuals=tuple(residuals),
        tolerance=tol,
        verdict=_verdict(residuals, tol, exact=True),
        seed=seed,
    )


def check_adjoint_symmetry(reps, f, lam, m, tol=EXACT_TOL, seed=0):
    """R(lam,f)* = R(-conj(lam),f), exact in matrix algebra."""
    caches = _as_caches(reps)
    residuals = []
    for cache in caches:
        idx, sel = _box_selector(cache.rep, m)
        left = cache.solver(lam, f).apply(sel)[idx].conj().T
        right = cache.solver(-complex(lam).conjugate(), f).apply(sel)[idx]
        residuals.append(_block_norm(left - right))
    return RelationCheck(
        relation="adjoint",
        params={"f": _vec_param(f), "lambda": _scalar_param(lam)},
        truncations=tuple(c.rep.levels for c in caches),
        compression=m,
        residuals=tuple(residuals),
        tolerance=tol,
        verdict=_verdict(residuals, tol, exact=True),
        seed=seed,
    )


def check_zero_vector(reps, lam, m, tol=EXACT_TOL, seed=0):
    """R(lam,0) = (1/(i lam))*1, exact in matrix algebra."""
    caches = _as_caches(reps)
    residuals = []
    for cache in caches:
        rep = cache.rep
        idx, sel = _box_selector(rep, m)
        zero = (0.0,) * rep.space.dim
        block = cache.solver(lam, zero).apply(sel)[idx]
        block -= (1.0 / (1j * complex(lam))) * np.eye(len(idx))
        residuals.append(_block_norm(block))
    return RelationCheck(
        relation="zero_vector",
        params={"lambda": _scalar_param(lam)},
        truncations=tuple(c.rep.levels for c in caches),
        compression=m,
        residuals=tuple(residuals),
        tolerance=tol,
        verdict=_verdict(residuals, tol, exact=True),
        seed=seed,
    )


def check_relation_i(reps, f, g, lam, mu, m, tol=1e-6, space=None, seed=0):
    """[R(lam,f), R(mu,g)] = i sigma(f,g) R(lam,f) R(mu,g)^2 R(lam,f)."""
    caches = _as_caches(reps)
    residuals = []
    sig = None
    for cache in caches:
        sig = _sigma(space, cache.rep, f, g)
        idx, sel = _box_selector(cache.rep, m)
        a = cache.solver(lam, f)
        b = cache.solver(mu, g)
        block = a.apply(b.apply(sel)) - b.apply(a.apply(sel))
        block -= 1j * sig * a.apply(b.apply(b.apply(a.apply(sel))))
        residuals.append(_block_norm(block[idx]))
    return RelationCheck(
        relation="rel_i",
        params={
            "f": _vec_param(f),
            "g": _vec_param(g),
            "lambda": _scalar_param(lam),
            "mu": _scalar_param(mu),
            "sigma": sig,
        },
        truncations=tuple(c.rep.levels for c in caches),
        compression=m,
        residuals=tuple(residuals),
        tolerance=tol,
        verdict=_verdict(residuals, tol, exact=False),
        seed=seed,
    )


def check_relation_ii(reps, f, g, lam, mu, m, tol=1e-6, space=None, seed=0):
    """R(lam+mu,f+g)(R(lam,f)+R(mu,g)+i sigma(f,g) R(lam,f)^2 R(mu,g))
    = R(lam,f) R(mu,g); needs lam, mu, lam+mu away from the imaginary axis."""
    lam, mu = complex(lam), complex(mu)
    if lam.real == 0.0 or mu.real == 0.0 or (lam + mu).real == 0.0:
        raise DomainError(
            "additivity check requires Re(lam), Re(mu), Re(lam+mu) all nonzero"
        )
    caches = _as_caches(reps)
    fg = tuple(float(x) + float(y) for x, y in zip(f, g))
    residuals = []
    sig = None
    for cache in caches:
        sig = _sigma(space, cache.rep, f, g)
        idx, sel = _box_selector(cache.rep, m)
        a = cache.solver(lam, f)
        b = cache.solver(mu, g)
        s = cache.solver(lam + mu, fg)
        inner = a.apply(sel) + b.apply(sel)
        inner += 1j * sig * a.apply(a.apply(b.apply(sel)))
        block = s.apply(inner) - a.apply(b.apply(sel))
        residuals.append(_block_norm(block[idx]))
    return RelationCheck(
        relation="rel_ii",
        params={
            "f": _vec_param(f),
            "g": _vec_param(g),
            "lambda": _scalar_param(lam),
            "mu": _scalar_param(mu),
            "sigma": sig,
        },
        truncations=tuple(c.rep.levels for c in caches),
        compression=m,
        residuals=tuple(residuals),
        tolerance=tol,
        verdict=_verdict(residuals, tol, exact=False),
        seed=seed,
    )


def check_relation_iii(reps, f, lam, c, tol=EXACT_TOL, seed=0):
    """c R(c lam, c f) = R(lam, f), exact in matrix algebra; full-norm check."""
    c = complex(c)
    if c == 0 or c.imag != 0.0:
        raise ValueError("scaling parameter c must be real and nonzero")
    caches = _as_caches(reps)
    cf = tuple(c.real * float(x) for x in f)
    residuals = []
    for cache in caches:
        scaled = cache.solver(c * complex(lam), cf).matrix()
        plain = cache.solver(lam, f).matrix()
        residuals.append(_block_norm(c * scaled - plain))
    return RelationCheck(
        relation="rel_iii",
        params={"f": _vec_param(f), "lambda": _scalar_param(lam), "c": _scalar_param(c)},
        truncations=tuple(cc.rep.levels for cc in caches),
        compression=0,
        residuals=tuple(residuals),
        tolerance=tol,
        verdict=_verdict(residuals, tol, exact=True),
        seed=seed,
    )


def check_relation_iv(reps, f, g, mu, m, tol=1e-6, space=None, seed=0):
    """i[G_f, R(mu,g)] = sigma(f,g) R(mu,g)^2."""
    caches = _as_caches(reps)
    residuals = []
    sig = None
    for cache in caches:
        sig = _sigma(space, cache.rep, f, g)
        idx, sel = _box_selector(cache.rep, m)
        b = cache.solver(mu, g)
        gf = cache.generator(f)
        block = 1j * (gf @ b.apply(sel) - b.apply(gf[:, idx]))
        block -= sig * b.apply(b.apply(sel))
        residuals.append(_block_norm(block[idx]))
    return RelationCheck(
        relation="rel_iv",
        params={
            "f": _vec_param(f),
            "g": _vec_param(g),
            "mu": _scalar_param(mu),
            "sigma": sig,
        },
        truncations=tuple(c.rep.levels for c in caches),
        compression=m,
        residuals=tuple(residuals),
        tolerance=tol,
        verdict=_verdict(residuals, tol, exact=False),
        seed=seed,
    )


def _probe_matrix(rep: fock.FockRep, pattern: str) -> np.ndarray:
    out = np.eye(rep.dim, dtype=complex)
    if pattern == "I":
        return out
    for token in pattern.split("*"):
        mode = int(token[1:]) - 1
        if not 0 <= mode < rep.modes:
            raise ValueError(f"probe {pattern!r} references mode {mode + 1}")
        factor = rep.position[mode] if token[0] == "Q" else rep.momentum[mode]
        out = out @ factor
    return out


def check_almost_inner(reps, f, lam, probe, m, tol=1e-6, space=None, seed=0):
    """R(lam,f) d_f(A) R(lam,f) = i[A, R(lam,f)] for a probe operator A.

    String probes name monomials in the canonical pair ("Q1", "Q1*P1", "I");
    their derivative is taken as the commutator i[G_f, A], which makes the
    identity exact in matrix algebra.  Expression probes go through the
    symbolic derivation rule instead, which is where truncation shows up, so
    they fall under the convergence protocol.
    """
    caches = _as_caches(reps)
    if isinstance(probe, Expr):
        probe_id, probe_expr = str(probe), probe
    elif isinstance(probe, str) and _PROBE_MONOMIAL.match(probe):
        probe_id, probe_expr = probe, None
    elif isinstance(probe, str):
        probe_id, probe_expr = probe, parse(probe)
    else:
        raise TypeError("probe must be a monomial name or an expression")
    exact = probe_expr is None
    residuals = []
    for cache in caches:
        rep = cache.rep
        idx, sel = _box_selector(rep, m)
        a = cache.solver(lam, f)
        if exact:
            mat = _probe_matrix(rep, probe_id)
            gf = cache.generator(f)
            deriv = 1j * (gf @ mat - mat @ gf)
        else:
            sp = space if space is not None else rep.space
            mat = fock.evaluate(rep, probe_expr)
            deriv = fock.evaluate(rep, derivation(sp, f, probe_expr))
        block = a.apply(deriv @ a.apply(sel))
        block -= 1j * (mat @ a.apply(sel) - a.apply(mat @ sel))
        residuals.append(_block_norm(block[idx]))
    eff_tol = EXACT_TOL if exact else tol
    return RelationCheck(
        relation="almost_inner",
        params={"f": _vec_param(f), "lambda": _scalar_param(lam), "probe": probe_id},
        truncations=tuple(c.rep.levels for c in caches),
        compression=m,
        residuals=tuple(residuals),
        tolerance=eff_tol,
        verdict=_verdict(residuals, eff_tol, exact=exact),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# configuration


def _default_vectors(modes: int) -> tuple:
    dim = 2 * modes
    basis = tuple(
        tuple(1.0 if j == i else 0.0 for j in range(dim)) for i in range(dim)
    )
    return basis + ((1.0,) * dim,)


@dataclass(frozen=True)
class Config:
    """Suite configuration; validated eagerly so bad files fail fast."""

    modes: int = 1
    truncations: tuple = (64, 128, 256)
    compression: int = 6
    tolerance: float = 1e-6
    seed: int = 0
    space: dict = None  # explicit bilinear-form description; None means standard
    lambdas: tuple = (1.0, -1.0, 2.0)
    scales: tuple = (-1.0, 0.5, 2.5)
    vectors: tuple = None  # None means basis directions plus the diagonal
    probes: tuple = ()
    families: tuple = None  # None means all applicable
    max_dim: int = fock.DEFAULT_MAX_DIM

    def __post_init__(self):
        object.__setattr__(self, "modes", int(self.modes))
        if self.modes < 1:
            raise ConfigError("modes must be a positive integer")
        trunc = tuple(int(n) for n in self.truncations)
        if not trunc:
            raise ConfigError("truncation list must be nonempty")
        if any(n < 2 for n in trunc) or list(trunc) != sorted(set(trunc)):
            raise ConfigError("truncation list must be strictly ascending, each >= 2")
        object.__setattr__(self, "truncations", trunc)
        if trunc[-1] ** self.modes > int(self.max_dim):
            raise ConfigError(
                f"dimension {trunc[-1]}**{self.modes} exceeds the memory cap "
                f"{self.max_dim}"
            )
        m = int(self.compression)
        if not 1 <= m <= trunc[0]:
            raise ConfigError("compression cutoff must lie in [1, smallest truncation]")
        object.__setattr__(self, "compression", m)
        if not float(self.tolerance) > 0.0:
            raise ConfigError("tolerance must be positive")
        object.__setattr__(self, "tolerance", float(self.tolerance))
        object.__setattr__(self, "seed", int(self.seed))
        lambdas = tuple(complex(z) for z in self.lambdas)
        if not lambdas or any(z.real == 0.0 for z in lambdas):
            raise ConfigError("every spectral parameter needs a nonzero real part")
        object.__setattr__(self, "lambdas", lambdas)
        scales = tuple(float(c) for c in self.scales)
        if any(c == 0.0 for c in scales):
            raise ConfigError("scaling parameters must be nonzero")
        object.__setattr__(self, "scales", scales)
        vectors = self.vectors
        if vectors is None:
            vectors = _default_vectors(self.modes)
        vectors = tuple(tuple(float(x) for x in v) for v in vectors)
        if any(len(v) != 2 * self.modes for v in vectors):
            raise ConfigError(
                f"every vector must have {2 * self.modes} coordinates"
            )
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "probes", tuple(str(p) for p in self.probes))
        fams = self.families
        if fams is not None:
            fams = tuple(str(x) for x in fams)
            unknown = [x for x in fams if x not in FAMILY_ORDER]
            if unknown:
                raise ConfigError(f"unknown relation families: {unknown}")
            if "almost_inner" in fams and not self.probes:
                raise ConfigError("almost_inner requires at least one probe")
            object.__setattr__(self, "families", fams)
        if self.space is not None:
            if self.space_object().dim != 2 * self.modes:
                raise ConfigError("space dimension does not match mode count")

    def space_object(self) -> symplectic.SymplecticSpace:
        if self.space is None:
            return symplectic.standard_space(self.modes)
        return symplectic.space_from_config(self.space)

    def enabled_families(self) -> tuple:
        if self.families is not None:
            return self.families
        fams = [x for x in FAMILY_ORDER if x != "almost_inner"]
        if self.probes:
            fams.append("almost_inner")
        return tuple(fams)

    def to_dict(self) -> dict:
        out = {"schema_version": 1}
        for info in fields(self):
            value = getattr(self, info.name)
            if info.name == "lambdas":
                value = [_scalar_param(z) for z in value]
            elif info.name in ("truncations", "scales", "probes"):
                value = list(value)
            elif info.name == "vectors":
                value = [list(v) for v in value]
            elif info.name == "families" and value is not None:
                value = list(value)
            out[info.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        data = dict(data)
        version = data.pop("schema_version", 1)
        if version != 1:
            raise ConfigError(f"unsupported config schema version {version}")
        known = {info.name for info in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in data.items():
            if key == "lambdas" and value is not None:
                value = tuple(
                    complex(z[0], z[1]) if isinstance(z, (list, tuple)) else complex(z)
                    for z in value
                )
            kwargs[key] = value
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "Config":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(data)

    def to_json(self, pretty: bool = False) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2 if pretty else None)


# ---------------------------------------------------------------------------
# suite


@dataclass(frozen=True)
class SuiteResult:
    """All checks from one configuration plus the cross-validation scalar."""

    config: Config
    checks: tuple
    sigma_cross_max: float

    def __iter__(self):
        return iter(self.checks)

    def __len__(self):
        return len(self.checks)

    def __getitem__(self, item):
        return self.checks[item]

    @property
    def all_pass(self) -> bool:
        return bool(self.checks) and all(c.verdict for c in self.checks)

    def families(self) -> tuple:
        present = {c.relation for c in self.checks}
        return tuple(x for x in FAMILY_ORDER if x in present)

    def to_report(self) -> dict:
        return {
            "schema_version": 1,
            "config": self.config.to_dict(),
            "families": list(self.families()),
            "checks": [c.to_report() for c in self.checks],
            "sigma_cross_max": float(self.sigma_cross_max),
            "all_pass": self.all_pass,
        }


def _guarded(builder, relation, params, truncations, m, tol, seed):
    try:
        return builder()
    except Exception as exc:  # noqa: BLE001 - a failed check must not kill the suite
        params = dict(params)
        params["error"] = f"{type(exc).__name__}: {exc}"
        return RelationCheck(
            relation=relation,
            params=params,
            truncations=tuple(truncations),
            compression=m,
            residuals=(math.inf,) * len(tuple(truncations)),
            tolerance=tol,
            verdict=False,
            seed=seed,
        )


def _distinct_pairs(values):
    values = list(values)
    return [(a, b) for i, a in enumerate(values) for b in values[i + 1 :]]


def run_suite(config: Config) -> SuiteResult:
    """Runs every enabled family over the configured grid.

    A check that raises is recorded as failed (with the error message in its
    params) and the suite continues.  Deterministic for a fixed config.
    """
    space = config.space_object()
    caches = [
        SolverCache(fock.build_rep(config.modes, n, config.max_dim))
        for n in config.truncations
    ]
    m = config.compression
    tol = config.tolerance
    seed = config.seed
    trunc = config.truncations
    enabled = config.enabled_families()
    lambdas = config.lambdas
    vectors = config.vectors
    checks = []

    def add(relation, params, builder, check_tol):
        checks.append(
            _guarded(builder, relation, params, trunc, m, check_tol, seed)
        )

    if "pseudo" in enabled:
        for lam, mu in _distinct_pairs(lambdas):
            for f in vectors:
                add(
                    "pseudo",
                    {"f": _vec_param(f), "lambda": _scalar_param(lam), "mu": _scalar_param(mu)},
                    lambda lam=lam, mu=mu, f=f: check_pseudo_resolvent(
                        caches, f, lam, mu, m, seed=seed
                    ),
                    EXACT_TOL,
                )
    if "adjoint" in enabled:
        for lam in lambdas:
            for f in vectors:
                add(
                    "adjoint",
                    {"f": _vec_param(f), "lambda": _scalar_param(lam)},
                    lambda lam=lam, f=f: check_adjoint_symmetry(
                        caches, f, lam, m, seed=seed
                    ),
                    EXACT_TOL,
                )
    if "zero_vector" in enabled:
        for lam in lambdas:
            add(
                "zero_vector",
                {"lambda": _scalar_param(lam)},
                lambda lam=lam: check_zero_vector(caches, lam, m, seed=seed),
                EXACT_TOL,
            )
    if "rel_i" in enabled:
        lam0 = lambdas[0]
        pair_params = [(lam0, lam0), (lam0, lambdas[-1])]
        for lam, mu in pair_params:
            for f, g in _distinct_pairs(vectors):
                add(
                    "rel_i",
                    {"f": _vec_param(f), "g": _vec_param(g), "lambda": _scalar_param(lam), "mu": _scalar_param(mu)},
                    lambda lam=lam, mu=mu, f=f, g=g: check_relation_i(
                        caches, f, g, lam, mu, m, tol=tol, space=space, seed=seed
                    ),
                    tol,
                )
    if "rel_ii" in enabled:
        lam0 = lambdas[0]
        pair_params = [
            (lam, mu)
            for lam, mu in [(lam0, lam0), (lam0, lambdas[-1])]
            if (complex(lam) + complex(mu)).real != 0.0
        ]
        for lam, mu in pair_params:
            for f, g in _distinct_pairs(vectors):
                add(
                    "rel_ii",
                    {"f": _vec_param(f), "g": _vec_param(g), "lambda": _scalar_param(lam), "mu": _scalar_param(mu)},
                    lambda lam=lam, mu=mu, f=f, g=g: check_relation_ii(
                        caches, f, g, lam, mu, m, tol=tol, space=space, seed=seed
                    ),
                    tol,
                )
    if "rel_iii" in enabled:
        lam0 = lambdas[0]
        for c in config.scales:
            for f in vectors:
                add(
                    "rel_iii",
                    {"f": _vec_param(f), "lambda": _scalar_param(lam0), "c": c},
                    lambda c=c, f=f: check_relation_iii(
                        caches, f, lam0, c, seed=seed
                    ),
                    EXACT_TOL,
                )
    if "rel_iv" in enabled:
        mu0 = lambdas[0]
        for f in vectors:
            for g in vectors:
                if f == g:
                    continue
                add(
                    "rel_iv",
                    {"f": _vec_param(f), "g": _vec_param(g), "mu": _scalar_param(mu0)},
                    lambda f=f, g=g: check_relation_iv(
                        caches, f, g, mu0, m, tol=tol, space=space, seed=seed
                    ),
                    tol,
                )
    if "almost_inner" in enabled:
        lam0 = lambdas[0]
        for probe in config.probes:
            for f in vectors:
                add(
                    "almost_inner",
                    {"f": _vec_param(f), "lambda": _scalar_param(lam0), "probe": probe},
                    lambda probe=probe, f=f: check_almost_inner(
                        caches, f, lam0, probe, m, tol=tol, space=space, seed=seed
                    ),
                    tol,
                )

    sigma_cross_max = _sigma_cross_validation(caches[-1], space, vectors, m, seed)
    return SuiteResult(
        config=config, checks=tuple(checks), sigma_cross_max=sigma_cross_max
    )


def _sigma_cross_validation(cache, space, vectors, m, seed) -> float:
    """Pins the bilinear pairing against the scalar extracted from the
    commutator of two field generators; raises if they disagree."""
    worst = 0.0
    for f, g in _distinct_pairs(vectors):
        gf = cache.generator(f)
        gg = cache.generator(g)
        prod = gf @ gg
        k = -1j * (prod - prod.conj().T)
        report = fock.schur_constant(cache.rep, k, cutoff=m, seed=seed)
        target = symplectic.pair(space, f, g)
        gap = abs(report.mean - target)
        if not report.is_scalar or gap > SIGMA_CROSS_TOL:
            raise RuntimeError(
                f"commutator scalar {report.mean} disagrees with the pairing "
                f"{target} for f={f}, g={g} (gap {gap:.3e})"
            )
        worst = max(worst, gap)
    return worst
