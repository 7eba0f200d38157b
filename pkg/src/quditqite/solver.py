"""Adaptive-ansatz imaginary-time loop on qudit product states."""
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from ._accel import backend_name
from .expectation import HamiltonianSpec, commutator_expectation, generator_second_moment, marginals
from .problem import is_feasible
from .qudit import NORM_TOL, ProductState, build_pool, perturbed_initial_state

RUN_RECORD_SCHEMA_VERSION = 1


@dataclass
class SolverConfig:
    delta_tau: float = 5e-3
    max_steps: int = 20000
    plateau_window: int = 2000
    record_every: int = 1
    record_selections: bool = True
    init_noise: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not (self.delta_tau > 0 and np.isfinite(self.delta_tau)):
            raise ValueError(f"delta_tau must be positive, got {self.delta_tau}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.plateau_window < 1:
            raise ValueError("plateau_window must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if not (self.init_noise >= 0 and np.isfinite(self.init_noise)):
            raise ValueError("init_noise must be a finite non-negative number")


@dataclass
class RunRecord:
    """Trajectory and outcome of one solve.

    Series are indexed by ``steps``; entry t describes the state after t
    updates (t = 0 is the initial state). ``assignment`` is the best rounded
    assignment seen anywhere on the trajectory.
    """

    num_vertices: int
    num_partitions: int
    c_max: int
    instance_seed: int | None
    config: dict
    steps: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    rounded_costs: list = field(default_factory=list)
    rounded_cut_costs: list = field(default_factory=list)
    partition_counts: list = field(default_factory=list)
    selections: list = field(default_factory=list)
    assignment: list = field(default_factory=list)
    best_cost: float = float("inf")
    best_cut_cost: float = float("inf")
    best_step: int = 0
    best_counts: list = field(default_factory=list)
    feasible: bool = False
    last_assignment: list = field(default_factory=list)
    last_cost: float = float("inf")
    last_energy: float = float("nan")
    steps_executed: int = 0
    stop_reason: str = ""
    wall_time: float = 0.0
    backend: str = ""
    final_amplitudes: list = field(default_factory=list, repr=False)

    def to_dict(self):
        d = asdict(self)
        d["schema_version"] = RUN_RECORD_SCHEMA_VERSION
        return d

    def to_json(self, path=None, timing=True):
        d = self.to_dict()
        if not timing:
            d["wall_time"] = None
        text = json.dumps(d, indent=1) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        version = data.pop("schema_version", None)
        if version != RUN_RECORD_SCHEMA_VERSION:
            raise ValueError(f"unsupported RunRecord schema version {version!r}")
        if data.get("wall_time") is None:
            data["wall_time"] = float("nan")
        return cls(**data)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def select_generators(spec, state, pools=None):
    """Pool index per qudit maximising ``|<[G, H]>|``; lowest index on ties."""
    table = marginals(state)
    if pools is None:
        pools = build_pool(state.dim)
    out = np.empty(state.num_qudits, dtype=np.int64)
    for i in range(state.num_qudits):
        vals = [abs(commutator_expectation(spec, state, i, op, table)) for op in pools]
        out[i] = int(np.argmax(vals))
    return out


def compute_coefficient(spec, state, qudit, op):
    """Expansion coefficient ``a = -(i/2) <[G, H]> / <G^2> = m / (2 <G^2>)``."""
    m = commutator_expectation(spec, state, qudit, op)
    g2 = generator_second_moment(state, qudit, op)
    if not (np.isfinite(m) and np.isfinite(g2)):
        raise FloatingPointError(f"non-finite expectation on qudit {qudit}: m={m}, <G^2>={g2}")
    if g2 < kernels.DEGENERATE_G2:
        return 0.0
    return 0.5 * m / g2


@dataclass
class StepInfo:
    energy_before: float
    selections: np.ndarray
    coefficients: np.ndarray


def step(spec, state, config):
    """One update of every qudit, all coefficients taken from the pre-step state.

    Returns ``(new_state, StepInfo)``; ``state`` is left untouched.
    """
    spec.check(state)
    amps = state.amplitudes.copy()
    sel = np.empty(state.num_qudits, dtype=np.int64)
    coef = np.empty(state.num_qudits)
    energy = kernels.step(amps, spec.ei, spec.ej, spec.w, spec.lam1, spec.lam2, spec.cmax,
                          config.delta_tau, sel, coef)
    if not np.all(np.isfinite(coef)):
        raise FloatingPointError("non-finite expansion coefficient")
    new = ProductState.__new__(ProductState)
    new.amplitudes = amps
    norms = np.linalg.norm(amps, axis=1)
    if not np.all(np.abs(norms - 1.0) <= NORM_TOL):
        raise FloatingPointError(f"normalisation drifted by {np.max(np.abs(norms - 1.0)):.3e}")
    return new, StepInfo(float(energy), sel, coef)


def solve(instance, config=None, initial_state=None):
    """Run the imaginary-time loop and return a :class:`RunRecord`.

    Stops after ``max_steps`` updates or once the rounded total cost has
    not changed for ``plateau_window`` consecutive updates. Without an
    explicit ``initial_state`` the start is the uniform product state with
    qudit 0 in ``|0>``, perturbed by ``config.init_noise`` (seeded by
    ``config.seed``).
    """
    config = config or SolverConfig()
    spec = HamiltonianSpec(instance)
    n, d = instance.num_vertices, instance.num_partitions
    if initial_state is None:
        initial_state = perturbed_initial_state(n, d, config.init_noise, config.seed)
    state = initial_state
    spec.check(state)
    amps = np.ascontiguousarray(state.amplitudes, dtype=np.float64).copy()
    ei, ej, w = spec.ei, spec.ej, spec.w
    lam1, lam2, cmax, dtau = spec.lam1, spec.lam2, spec.cmax, config.delta_tau

    rec = RunRecord(n, d, instance.c_max, instance.seed, asdict(config), backend=backend_name())
    labels = np.zeros(n, dtype=np.int64)
    counts = np.zeros(d, dtype=np.int64)
    sel = np.zeros(n, dtype=np.int64)
    coef = np.zeros(n)

    t0 = time.perf_counter()
    cut, cost = kernels.rounded_cost(amps, ei, ej, w, lam1, lam2, cmax, labels, counts)
    best = (cost, cut, 0, labels.copy(), counts.copy())
    last_cost, unchanged = cost, 0
    stop = "max_steps"
    pending = (0, None, cost, cut, counts.copy(), None)  # step, energy, cost, cut, counts, sel

    def record(entry):
        t, e, c, ct, cn, sl = entry
        rec.steps.append(t)
        rec.energies.append(float(e))
        rec.rounded_costs.append(float(c))
        rec.rounded_cut_costs.append(float(ct))
        rec.partition_counts.append(cn.tolist())
        if config.record_selections:
            rec.selections.append(None if sl is None else sl.tolist())

    s = 0
    while s < config.max_steps:
        energy = kernels.step(amps, ei, ej, w, lam1, lam2, cmax, dtau, sel, coef)
        if not np.isfinite(energy):
            raise FloatingPointError(f"non-finite energy at step {s}")
        # energy of the state just updated belongs to the pending entry
        if pending[0] % config.record_every == 0:
            record((pending[0], energy) + pending[2:5] + (sel.copy(),))
        s += 1
        cut, cost = kernels.rounded_cost(amps, ei, ej, w, lam1, lam2, cmax, labels, counts)
        pending = (s, None, cost, cut, counts.copy(), None)
        if cost < best[0]:
            best = (cost, cut, s, labels.copy(), counts.copy())
        if cost == last_cost:
            unchanged += 1
        else:
            last_cost, unchanged = cost, 0
        if unchanged >= config.plateau_window:
            stop = "plateau"
            break
    final_energy = kernels.energy(amps, ei, ej, w, lam1, lam2, cmax)
    record((s, final_energy) + pending[2:5] + (None,))
    rec.wall_time = time.perf_counter() - t0

    rec.best_cost, rec.best_cut_cost, rec.best_step = float(best[0]), float(best[1]), int(best[2])
    rec.assignment = best[3].tolist()
    rec.best_counts = best[4].tolist()
    rec.feasible = bool(is_feasible(instance, best[3])[0])
    rec.last_assignment = labels.tolist()
    rec.last_cost = float(pending[2])
    rec.last_energy = float(final_energy)
    rec.steps_executed = s
    rec.stop_reason = stop
    rec.final_amplitudes = amps.tolist()
    return rec
