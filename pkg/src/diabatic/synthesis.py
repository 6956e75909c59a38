"""Gate targets, (v, b) search, composition and multi-qubit embedding."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError, IntegrationError, UnknownGateError
from .gatemodel import GateErrorReport, ZhuNakamuraForm, fit_zn_form, gate_error
from .model import DEFAULT_MODEL, ModelSpec
from .propagator import (
    DEFAULT_SETTINGS,
    IntegratorSettings,
    direct_evolution_operator,
    full_evolution_operator,
    half_passage_p,
)
from .trajectory import make_trajectory

_S2 = 1.0 / math.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_H = _S2 * np.array([[1, 1], [1, -1]], dtype=complex)
_T = np.diag([1.0, np.exp(1j * math.pi / 4)])

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": _X,
    "iX": 1j * _X,
    "Y": -1j * _X @ _Z,
    "Z": _Z,
    "iZ": 1j * _Z,
    "T": _T,
    # determinant-one form of T, the phase a symmetric passage can reach
    "T_sym": np.exp(-1j * math.pi / 8) * _T,
    "H": _H,
    "iH": 1j * _H,
}


@dataclass(frozen=True)
class GateTarget:
    name: str
    matrix: np.ndarray


def target_unitary(name: str) -> GateTarget:
    try:
        return GateTarget(name, _MATRICES[name].copy())
    except KeyError:
        raise UnknownGateError(f"unknown gate {name!r}; known: {sorted(_MATRICES)}") from None


@dataclass(frozen=True)
class SearchSpec:
    """Coarse-grid window plus simplex refinement budget."""

    v_range: tuple = (0.01, 1.0)
    b_range: tuple = (0.0, 0.95)
    nv: int = 100
    nb: int = 48
    max_evals: int = 400
    xatol: float = 1e-9
    fatol: float = 1e-16

    def __post_init__(self):
        (v0, v1), (b0, b1) = self.v_range, self.b_range
        if not (0.0 < v0 < v1 <= 1.0):
            raise DomainError(f"v range must satisfy 0 < v_min < v_max <= 1, got {self.v_range}")
        if not (0.0 <= b0 <= b1 <= 0.95):
            raise DomainError(f"b range must lie in [0, 0.95], got {self.b_range}")
        if self.nv < 1 or self.nb < 1:
            raise DomainError("grid must have at least one point per axis")

    def grid(self):
        v = np.linspace(*self.v_range, self.nv)
        b = np.linspace(*self.b_range, self.nb) if self.nb > 1 else np.array([self.b_range[0]])
        return v, b


@dataclass(frozen=True)
class GateRecipe:
    """How a named gate is realised.

    ``target`` is the phase-fixed matrix the passage produces; ``point`` the
    reference working point; ``phases`` the (α00, α01) it should satisfy
    (None where only α00 - α01 = mπ/2 matters); ``search`` the default
    window for synthesis.
    """

    name: str
    target: str
    point: tuple
    phases: tuple | None
    search: SearchSpec
    n_qubits: int = 1
    coupled_pair: tuple | None = None


GATES = {
    "not": GateRecipe("not", "iX", (0.2547, 0.0), None, SearchSpec((0.01, 1.0), (0.0, 0.95))),
    "z": GateRecipe(
        "z", "iZ", (0.051, 0.1094), (math.pi / 4, 5 * math.pi / 4),
        SearchSpec((0.046, 0.056), (0.06, 0.16)),
    ),
    "t": GateRecipe(
        "t", "T_sym", (0.0337, 0.2164), (15 * math.pi / 16, -math.pi / 16),
        SearchSpec((0.031, 0.036), (0.17, 0.26)),
    ),
    "hadamard": GateRecipe(
        "hadamard", "iH", (0.2249, 0.2677), (3 * math.pi / 8, -7 * math.pi / 8),
        SearchSpec((0.18, 0.32), (0.15, 0.35)),
    ),
    "cnot": GateRecipe(
        "cnot", "iX", (0.2547, 0.0), None, SearchSpec((0.01, 1.0), (0.0, 0.95)), n_qubits=2, coupled_pair=(2, 3)
    ),
    "toffoli": GateRecipe(
        "toffoli", "iX", (0.2547, 0.0), None, SearchSpec((0.01, 1.0), (0.0, 0.95)), n_qubits=3, coupled_pair=(6, 7)
    ),
}
_ALIASES = {"x": "not", "h": "hadamard", "ccnot": "toffoli", "cx": "cnot"}


def gate_recipe(name: str) -> GateRecipe:
    key = _ALIASES.get(name.lower(), name.lower())
    try:
        return GATES[key]
    except KeyError:
        raise UnknownGateError(f"unknown gate {name!r}; known: {sorted(GATES)}") from None


@dataclass
class SynthesisResult:
    v_opt: float
    b_opt: float
    gate_error: GateErrorReport
    zn: ZhuNakamuraForm
    unitary: np.ndarray
    target: GateTarget
    converged: bool
    grid_v: np.ndarray
    grid_b: np.ndarray
    grid_objective: np.ndarray
    search_trace: list = field(default_factory=list)


def _objective(model, target, settings):
    def fn(vb):
        v, b = float(vb[0]), float(vb[1])
        try:
            u = full_evolution_operator(model, make_trajectory(v, b), settings)
        except IntegrationError:
            return math.inf
        return gate_error(u, target).d_max

    return fn


def evaluate_grid(model, target, v, b, settings=DEFAULT_SETTINGS, workers=1):
    """d_max against ``target`` on the outer product of v and b (shape (nv, nb))."""
    fn = _objective(model, target, settings)
    points = [(x, y) for x in v for y in b]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(fn, points))
    else:
        values = [fn(pt) for pt in points]
    return np.array(values).reshape(len(v), len(b))


def synthesize(
    model: ModelSpec,
    target: GateTarget,
    search: SearchSpec = SearchSpec(),
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    workers: int = 1,
) -> SynthesisResult:
    """Find (v, b) minimising d_max against ``target``.

    A coarse grid is scanned first; ties go to the smaller v, then the
    smaller b. A bounded Nelder-Mead simplex, one grid cell wide, refines
    from the best cell.
    """
    u_t = np.asarray(target.matrix, dtype=complex)
    if u_t.shape != (2, 2):
        raise DomainError("synthesis targets must be 2x2")
    v, b = search.grid()
    obj = evaluate_grid(model, u_t, v, b, settings, workers)
    # argmin on the flattened (v-major) table returns the first minimum,
    # i.e. the smallest v and then the smallest b
    i, j = np.unravel_index(int(np.argmin(obj)), obj.shape)
    start = np.array([v[i], b[j]])
    dv = (v[1] - v[0]) if len(v) > 1 else 1e-3
    db = (b[1] - b[0]) if len(b) > 1 else 0.0

    trace = []
    fn = _objective(model, u_t, settings)

    def traced(x):
        val = fn(x)
        trace.append((float(x[0]), float(x[1]), float(val)))
        return val

    (v_lo, v_hi), (b_lo, b_hi) = search.v_range, search.b_range
    simplex = np.array([start, start + [dv, 0.0], start + [0.0, db if db > 0 else 1e-3]])
    simplex[:, 0] = np.clip(simplex[:, 0], v_lo, v_hi)
    simplex[:, 1] = np.clip(simplex[:, 1], b_lo, b_hi)
    if b_hi == b_lo:
        res = optimize.minimize_scalar(
            lambda x: traced((x, b_lo)),
            bounds=(max(v_lo, start[0] - dv), min(v_hi, start[0] + dv)),
            method="bounded",
            options={"xatol": search.xatol, "maxiter": search.max_evals},
        )
        best = np.array([res.x, b_lo])
        best_val = float(res.fun)
        converged = bool(res.success)
    else:
        res = optimize.minimize(
            traced,
            start,
            method="Nelder-Mead",
            bounds=[(v_lo, v_hi), (b_lo, b_hi)],
            options={
                "initial_simplex": simplex,
                "xatol": search.xatol,
                "fatol": search.fatol,
                "maxfev": search.max_evals,
            },
        )
        best, best_val = res.x, float(res.fun)
        converged = bool(res.success)
    if obj[i, j] <= best_val:
        best, best_val = start, float(obj[i, j])
    v_opt, b_opt = float(best[0]), float(best[1])
    traj = make_trajectory(v_opt, b_opt)
    u = full_evolution_operator(model, traj, settings)
    zn = fit_zn_form(u, half_passage_p(model, traj, settings))
    return SynthesisResult(
        v_opt=v_opt,
        b_opt=b_opt,
        gate_error=gate_error(u, u_t),
        zn=zn,
        unitary=u,
        target=target,
        converged=converged,
        grid_v=v,
        grid_b=b,
        grid_objective=obj,
        search_trace=trace,
    )


def compose(gates) -> np.ndarray:
    """Product of 2x2 unitaries, first element acting first."""
    gates = list(gates)
    if not gates:
        raise DomainError("compose needs at least one gate")
    out = np.asarray(gates[0], dtype=complex)
    for g in gates[1:]:
        out = np.asarray(g, dtype=complex) @ out
    return out


@dataclass(frozen=True)
class EmbeddedGate:
    n_qubits: int
    coupled_pair: tuple
    full_unitary: np.ndarray
    block: np.ndarray

    def complement_indices(self):
        return [k for k in range(2**self.n_qubits) if k not in self.coupled_pair]


def embed(block, n_qubits: int, coupled_pair) -> EmbeddedGate:
    """Place a 2x2 block on two computational basis states, identity elsewhere."""
    block = np.asarray(block, dtype=complex)
    if block.shape != (2, 2):
        raise DomainError("block must be 2x2")
    dim = 2**n_qubits
    i, j = (int(k) for k in coupled_pair)
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise DomainError(f"invalid coupled pair {coupled_pair} for {n_qubits} qubits")
    full = np.eye(dim, dtype=complex)
    idx = [i, j]
    full[np.ix_(idx, idx)] = block
    return EmbeddedGate(n_qubits=n_qubits, coupled_pair=(i, j), full_unitary=full, block=block.copy())


def controlled_x(n_qubits: int) -> np.ndarray:
    """Ideal CNOT (n=2) or Toffoli (n=3) flipping the last qubit."""
    dim = 2**n_qubits
    u = np.eye(dim, dtype=complex)
    u[np.ix_([dim - 2, dim - 1], [dim - 2, dim - 1])] = _X
    return u


def literal_pair_hamiltonian(s: float) -> np.ndarray:
    """Coupled-pair Hamiltonian with equal (+s^4) diagonal entries.

    Both diabatic levels carry the same energy, so the levels cross instead
    of pseudo-crossing; kept for comparison with the default pattern.
    """
    return s**4 * np.eye(2) - (1.0 - s) ** 4 * _X.real


def pair_block(
    v: float,
    b: float,
    model: ModelSpec = DEFAULT_MODEL,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    literal: bool = False,
) -> np.ndarray:
    """2x2 evolution on the coupled pair of a multi-qubit gate."""
    traj = make_trajectory(v, b)
    if literal:
        return direct_evolution_operator(literal_pair_hamiltonian, traj, rtol=settings.rel_tol, atol=settings.abs_tol)
    return full_evolution_operator(model, traj, settings)


def embedded_gate(
    name: str,
    v: float,
    b: float,
    model: ModelSpec = DEFAULT_MODEL,
    settings: IntegratorSettings = DEFAULT_SETTINGS,
    literal: bool = False,
) -> EmbeddedGate:
    recipe = gate_recipe(name)
    if recipe.n_qubits < 2:
        raise DomainError(f"{name} is a single-qubit gate")
    return embed(pair_block(v, b, model, settings, literal), recipe.n_qubits, recipe.coupled_pair)
