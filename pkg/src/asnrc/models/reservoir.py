"""Reservoir topology and discrete-time dynamics.

Neuron update, for every neuron i::

    x_i[t+1] = A( sum_j w_self[i, j] * x_j[t - delays[i, j]]
                  + (w_in u[t+1])_i + (w_fb y[t])_i
                  - decay * x_i[t] + noise_gain * v_i )

``A`` is ``activation_gain * tanh`` for the ideal backend or a scaled ASN cell
for the device backends, which bring their own noise.
"""

import logging
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from asnrc.errors import DimensionError, TopologyError, TrainingError
from asnrc.logs import log_tag
from asnrc.models.device import DeviceParams, asn_binary_response, asn_response
from asnrc.models.readout import ReadoutWeights, readout, train_readout
from asnrc.seeding import derive_rng

logger = logging.getLogger(__name__)

DENSE_EIG_LIMIT = 512
MAX_REDRAWS = 100


class IdealBackend(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["ideal"] = "ideal"


class AsnBackend(BaseModel):
    """ASN cell as activation; ``voltage_scale`` maps pre-activation units to volts."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["asn"] = "asn"
    device: DeviceParams = DeviceParams()
    voltage_scale: float = Field(default=0.2, gt=0)


class AsnBinaryBackend(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["asn_binary"] = "asn_binary"
    device: DeviceParams = DeviceParams()
    voltage_scale: float = Field(default=0.2, gt=0)


ActivationBackend = Annotated[
    Union[IdealBackend, AsnBackend, AsnBinaryBackend], Field(discriminator="kind")
]


class ReservoirParams(BaseModel):
    """Neuron dynamics parameters.

    Attributes:
        activation_gain: Output gain of the activation (states live in
            [-activation_gain, activation_gain]).
        noise_gain: Strength of the per-step Gaussian noise inside the
            activation (ideal backend only).
        decay: Per-step leak of a neuron's own state.
        step: Logical time step; always 1.
        washout: Initial steps dropped before states are harvested.
        activation_backend: Ideal tanh or one of the ASN device models.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    activation_gain: float = Field(default=1.0, gt=0)
    noise_gain: float = Field(default=0.05, ge=0)
    decay: float = Field(default=0.3, ge=0, le=1)
    step: Literal[1] = 1
    washout: int = Field(default=50, ge=0)
    activation_backend: ActivationBackend = IdealBackend()


class Topology(BaseModel):
    """Weights and per-edge transport delays of one reservoir.

    ``delays[i, j]`` is the number of steps a signal from neuron j needs to
    reach neuron i; it is only meaningful where ``w_self[i, j] != 0``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    w_in: np.ndarray
    w_self: sparse.csr_matrix
    w_fb: np.ndarray
    delays: np.ndarray
    d_max: int = Field(ge=1)
    spectral_radius: float
    seed: int = 0

    _taps: List[Tuple[int, sparse.csr_matrix]] = PrivateAttr(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> "Topology":
        n = self.n
        if self.w_self.shape != (n, n):
            raise DimensionError(f"w_self is {self.w_self.shape}, expected {(n, n)}")
        if self.w_in.ndim != 2 or self.w_in.shape[0] != n:
            raise DimensionError(f"w_in is {self.w_in.shape}, expected ({n}, m)")
        if self.w_fb.ndim != 2 or self.w_fb.shape[0] != n:
            raise DimensionError(f"w_fb is {self.w_fb.shape}, expected ({n}, p)")
        if self.delays.shape != (n, n):
            raise DimensionError(f"delays is {self.delays.shape}, expected {(n, n)}")
        if not np.isfinite(self.spectral_radius):
            raise TopologyError("spectral radius is not finite")
        rows, cols = self.w_self.nonzero()
        edge_delays = self.delays[rows, cols]
        if edge_delays.size and (edge_delays.min() < 1 or edge_delays.max() > self.d_max):
            raise TopologyError(f"edge delays must lie in [1, {self.d_max}]")
        return self

    def model_post_init(self, __context) -> None:
        coo = self.w_self.tocoo()
        d = self.delays[coo.row, coo.col]
        taps = []
        for lag in np.unique(d):
            sel = d == lag
            w_lag = sparse.csr_matrix((coo.data[sel], (coo.row[sel], coo.col[sel])), shape=(self.n, self.n))
            taps.append((int(lag), w_lag))
        self._taps = taps

    @property
    def m(self) -> int:
        return self.w_in.shape[1]

    @property
    def p(self) -> int:
        return self.w_fb.shape[1]

    @property
    def depth(self) -> int:
        """History length a state needs to serve every delay tap."""
        return self.d_max + 1

    def edges(self) -> List[Tuple[int, int]]:
        rows, cols = self.w_self.nonzero()
        return sorted(zip(rows.tolist(), cols.tolist()))

    def recurrent_drive(self, state: "ReservoirState") -> np.ndarray:
        drive = np.zeros(self.n)
        for lag, w_lag in self._taps:
            drive += w_lag @ state.tap(lag)
        return drive

    @classmethod
    def from_arrays(cls, w_in, w_self, w_fb, delays, seed: int = 0,
                    d_max: Optional[int] = None) -> "Topology":
        """Build a validated topology from explicit matrices."""
        w_self = sparse.csr_matrix(np.asarray(w_self.toarray() if sparse.issparse(w_self) else w_self, dtype=float))
        w_self.eliminate_zeros()
        w_in = np.array(w_in, dtype=float, ndmin=2)
        w_fb = np.array(w_fb, dtype=float, ndmin=2)
        delays = np.asarray(delays, dtype=np.int64)
        n = w_self.shape[0]
        if w_self.shape[0] != w_self.shape[1]:
            raise DimensionError(f"w_self must be square, got {w_self.shape}")
        if d_max is None:
            d_max = max(int(delays.max()) if delays.size else 1, 1)
        return cls(n=n, w_in=w_in, w_self=w_self, w_fb=w_fb, delays=delays, d_max=d_max,
                   spectral_radius=spectral_radius(w_self), seed=seed)


class ReservoirState:
    """
    Ring buffer of the most recent activation vectors.

    Attributes:
        buffer (np.ndarray): depth x n array; row ``head`` is the newest state.
        head (int): Row index of x[t].
        t (int): Number of steps taken since the state was created.
    """

    def __init__(self, n: int, depth: int, history: Optional[np.ndarray] = None):
        """
        Create a state, zero-filled unless ``history`` is given.

        Args:
            n: Neuron count.
            depth: Number of stored vectors, at least the largest delay + 1.
            history: Optional depth x n array ordered oldest to newest.
        """
        if depth < 2:
            raise DimensionError("a reservoir state needs a depth of at least 2")
        self.buffer = np.zeros((depth, n))
        self.head = depth - 1
        self.t = 0
        if history is not None:
            history = np.asarray(history, dtype=float)
            if history.shape != (depth, n):
                raise DimensionError(f"history is {history.shape}, expected {(depth, n)}")
            self.buffer[:] = history

    @classmethod
    def for_topology(cls, topo: Topology, history: Optional[np.ndarray] = None) -> "ReservoirState":
        return cls(topo.n, topo.depth, history)

    @property
    def n(self) -> int:
        return self.buffer.shape[1]

    @property
    def depth(self) -> int:
        return self.buffer.shape[0]

    @property
    def current(self) -> np.ndarray:
        return self.buffer[self.head]

    def tap(self, lag: int) -> np.ndarray:
        """State ``lag`` steps in the past; ``tap(0)`` is x[t]."""
        return self.buffer[(self.head - lag) % self.depth]

    def push(self, x: np.ndarray) -> None:
        self.head = (self.head + 1) % self.depth
        self.buffer[self.head] = x
        self.t += 1

    def history(self) -> np.ndarray:
        """Stored vectors ordered oldest to newest."""
        return np.roll(self.buffer, -(self.head + 1), axis=0)

    def copy(self) -> "ReservoirState":
        clone = ReservoirState(self.n, self.depth)
        clone.buffer[:] = self.buffer
        clone.head = self.head
        clone.t = self.t
        return clone


class OpenLoop(BaseModel):
    """Teacher forcing: ``teacher[t-1]`` drives the feedback path at step t."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["open_loop"] = "open_loop"
    teacher: np.ndarray
    y_init: Optional[np.ndarray] = None


class ClosedLoop(BaseModel):
    """The readout output ``W_out x[t]`` is fed back at step t+1."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["closed_loop"] = "closed_loop"
    weights: Optional[ReadoutWeights] = None


class NoFeedback(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["no_feedback"] = "no_feedback"
    weights: Optional[ReadoutWeights] = None


RunMode = Union[OpenLoop, ClosedLoop, NoFeedback]


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    states: np.ndarray  # n x T after washout
    outputs: Optional[np.ndarray] = None  # p x T after washout
    final_state: ReservoirState
    finite: bool = True


class EchoStateReport(BaseModel):
    converged: bool
    final_gap: float
    steps_to_converge: Optional[int] = None
    gaps: List[float] = []


class MemoryCapacity(BaseModel):
    per_lag: List[float]
    total: float


def spectral_radius(w) -> float:
    """Largest eigenvalue magnitude of a square matrix."""
    n = w.shape[0]
    if n == 0:
        return 0.0
    if sparse.issparse(w) and w.nnz == 0:
        return 0.0
    if n <= DENSE_EIG_LIMIT or not sparse.issparse(w):
        dense = w.toarray() if sparse.issparse(w) else np.asarray(w, dtype=float)
        return float(np.max(np.abs(np.linalg.eigvals(dense))))
    vals = sparse_linalg.eigs(w.astype(float), k=1, which="LM", v0=np.ones(n), return_eigenvectors=False)
    return float(np.abs(vals[0]))


def compute_delays(w_self, tau0: float = 1.0, d_max: int = 10) -> np.ndarray:
    """Integer transport delay per edge, inversely proportional to its strength.

    ``delay = clamp(round(tau0 * w_max / |w|), 1, d_max)`` on nonzero edges,
    0 elsewhere.
    """
    if tau0 <= 0:
        raise TopologyError("tau0 must be positive")
    if d_max < 1:
        raise TopologyError("d_max must be at least 1")
    w = np.abs(w_self.toarray() if sparse.issparse(w_self) else np.asarray(w_self, dtype=float))
    delays = np.zeros(w.shape, dtype=np.int64)
    edges = w > 0
    if not edges.any():
        return delays
    w_max = w[edges].max()
    raw = np.floor(tau0 * w_max / w[edges] + 0.5)
    delays[edges] = np.clip(raw, 1, d_max).astype(np.int64)
    return delays


def generate_topology(n: int, m: int = 1, p_out: int = 1, connectivity: float = 0.2,
                      spectral_radius: float = 0.9, input_scale: float = 1.0,
                      fb_scale: float = 1.0, tau0: float = 1.0, d_max: int = 10,
                      seed: int = 0) -> Topology:
    """Draw a random sparse reservoir, rescale it and attach delays.

    Every entry of ``w_self`` is an edge with probability ``connectivity`` and
    weight uniform in [-1, 1]; the matrix is then rescaled to the requested
    spectral radius. Draws with a zero spectral radius are redrawn.
    """
    target_radius = spectral_radius
    if n < 1:
        raise TopologyError("a reservoir needs at least one neuron")
    if not 0 < connectivity <= 1:
        raise TopologyError("connectivity must lie in (0, 1]")
    if target_radius <= 0:
        raise TopologyError("spectral radius must be positive")
    if d_max < 1:
        raise TopologyError("d_max must be at least 1")

    rng = derive_rng(seed, "topology/w_self")
    for attempt in range(MAX_REDRAWS):
        mask = rng.random((n, n)) < connectivity
        values = rng.uniform(-1.0, 1.0, size=(n, n))
        w = np.where(mask, values, 0.0)
        radius = _radius(w)
        if radius > np.finfo(float).eps * max(n, 1):
            break
        logger.debug("w_self draw %d has zero spectral radius, redrawing", attempt)
    else:
        raise TopologyError(f"no w_self draw with nonzero spectral radius in {MAX_REDRAWS} attempts")

    w *= target_radius / radius
    w_self = sparse.csr_matrix(w)
    w_in = derive_rng(seed, "topology/w_in").uniform(-input_scale, input_scale, size=(n, m))
    w_fb = derive_rng(seed, "topology/w_fb").uniform(-fb_scale, fb_scale, size=(n, p_out))
    delays = compute_delays(w_self, tau0=tau0, d_max=d_max)
    topo = Topology(n=n, w_in=w_in, w_self=w_self, w_fb=w_fb, delays=delays, d_max=d_max,
                    spectral_radius=_radius(w), seed=seed)
    log_tag(logger, "Topology", "n=%d edges=%d radius=%.4f max delay=%d",
            n, w_self.nnz, topo.spectral_radius, int(delays.max()), level=logging.DEBUG)
    return topo


def _radius(w: np.ndarray) -> float:
    return spectral_radius(sparse.csr_matrix(w) if w.shape[0] > DENSE_EIG_LIMIT else w)


def _activate(pre: np.ndarray, rp: ReservoirParams, rng: np.random.Generator) -> np.ndarray:
    gain = rp.activation_gain
    backend = rp.activation_backend
    if isinstance(backend, IdealBackend):
        if rp.noise_gain > 0:
            pre = pre + rp.noise_gain * rng.standard_normal(pre.shape)
        return gain * np.tanh(pre)
    scale = 2.0 * gain / backend.device.v_dd
    if isinstance(backend, AsnBackend):
        volts = asn_response(backend.voltage_scale * pre, backend.device, rng)
    else:
        volts = asn_binary_response(backend.voltage_scale * pre, backend.device, rng)
    # Rails of the buffer stage
    return np.clip(scale * volts, -gain, gain)


def step(state: ReservoirState, u_next, y_prev, topo: Topology, rp: ReservoirParams,
         rng: np.random.Generator) -> ReservoirState:
    """Advance ``state`` by one step in place and return it."""
    u = np.asarray(u_next, dtype=float).reshape(-1)
    y = np.asarray(y_prev, dtype=float).reshape(-1)
    if state.n != topo.n:
        raise DimensionError(f"state has {state.n} neurons, topology has {topo.n}")
    if state.depth < topo.depth:
        raise DimensionError(f"state keeps {state.depth} steps, delays need {topo.depth}")
    if u.size != topo.m:
        raise DimensionError(f"input has {u.size} channels, w_in expects {topo.m}")
    if y.size != topo.p:
        raise DimensionError(f"feedback has {y.size} channels, w_fb expects {topo.p}")

    x = state.current
    pre = topo.recurrent_drive(state) + topo.w_in @ u + topo.w_fb @ y - rp.decay * x
    state.push(_activate(pre, rp, rng))
    return state


def _as_series(values, width: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, np.newaxis] if width == 1 else arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise DimensionError(f"{name} must be T x {width}, got {arr.shape}")
    return arr


def run(topo: Topology, rp: ReservoirParams, inputs=None, mode: Optional[RunMode] = None,
        seed: int = 0, steps: Optional[int] = None, state: Optional[ReservoirState] = None,
        washout: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> RunResult:
    """Drive the reservoir and collect its states.

    Args:
        topo: Reservoir topology.
        rp: Dynamics parameters.
        inputs: T x m input sequence. May be omitted for a free run, in which
            case ``steps`` (or the teacher length) gives the number of steps
            and the input is zero.
        mode: OpenLoop, ClosedLoop or NoFeedback (default).
        seed: Master seed for the noise stream when ``rng`` is not given.
        steps: Step count for runs without inputs.
        state: Starting state; a zero state when omitted. Advanced in place.
        washout: Steps to drop; defaults to ``rp.washout``.
        rng: Noise generator, to continue a stream across chained runs.

    Returns:
        RunResult with n x T states and, where defined, p x T outputs.
    """
    mode = mode if mode is not None else NoFeedback()
    washout = rp.washout if washout is None else washout

    if isinstance(mode, OpenLoop):
        teacher = _as_series(mode.teacher, topo.p, "teacher")
        if inputs is None or np.size(inputs) == 0:
            inputs = np.zeros((teacher.shape[0], topo.m))
        inputs = _as_series(inputs, topo.m, "inputs")
        if teacher.shape[0] != inputs.shape[0]:
            raise DimensionError(f"teacher has {teacher.shape[0]} steps, inputs have {inputs.shape[0]}")
    else:
        if inputs is None or np.size(inputs) == 0:
            if steps is None:
                raise DimensionError("a run without inputs needs a step count")
            inputs = np.zeros((steps, topo.m))
        inputs = _as_series(inputs, topo.m, "inputs")
    if isinstance(mode, ClosedLoop):
        if mode.weights is None:
            raise TrainingError("closed-loop run needs trained readout weights")
        if mode.weights.n != topo.n or mode.weights.p != topo.p:
            raise DimensionError(f"readout is {mode.weights.p}x{mode.weights.n}, topology is {topo.p}x{topo.n}")

    total = inputs.shape[0]
    rng = rng if rng is not None else derive_rng(seed, "reservoir/noise")
    state = state if state is not None else ReservoirState.for_topology(topo)
    weights = None if isinstance(mode, OpenLoop) else mode.weights
    has_outputs = isinstance(mode, OpenLoop) or weights is not None

    states = np.zeros((topo.n, total))
    outputs = np.zeros((topo.p, total)) if has_outputs else None
    zero_fb = np.zeros(topo.p)

    if isinstance(mode, OpenLoop):
        y_prev = zero_fb if mode.y_init is None else np.asarray(mode.y_init, dtype=float).reshape(-1)
    elif isinstance(mode, ClosedLoop):
        y_prev = readout(weights, state.current)
    else:
        y_prev = zero_fb

    for t in range(total):
        step(state, inputs[t], y_prev, topo, rp, rng)
        x = state.current
        states[:, t] = x
        if isinstance(mode, OpenLoop):
            y_prev = teacher[t]
            outputs[:, t] = y_prev
        elif isinstance(mode, ClosedLoop):
            y_prev = readout(weights, x)
            outputs[:, t] = y_prev
        elif weights is not None:
            outputs[:, t] = readout(weights, x)

    finite = bool(np.all(np.isfinite(states)))
    return RunResult(
        states=states[:, washout:],
        outputs=None if outputs is None else outputs[:, washout:],
        final_state=state,
        finite=finite,
    )


def _noise_free(rp: ReservoirParams) -> ReservoirParams:
    backend = rp.activation_backend
    if not isinstance(backend, IdealBackend):
        # The binary cell is replaced by its noiseless analog twin
        device = backend.device.model_copy(update={"noise_amp_alpha": 0.0})
        backend = AsnBackend(device=device, voltage_scale=backend.voltage_scale)
    return rp.model_copy(update={"noise_gain": 0.0, "activation_backend": backend})


def echo_state_check(topo: Topology, rp: ReservoirParams, trials: int = 1, horizon: int = 500,
                     tol: float = 1e-6, seed: int = 0, drive: float = 3.0) -> EchoStateReport:
    """Check that two different initial states forget their difference.

    Each trial starts two trajectories from independent random histories and
    drives both with the same input, uniform in ``[-drive, drive]``; the trial
    converges when the max-norm gap of the current states falls below ``tol``
    within ``horizon`` steps. The report converges only if every trial does.
    """
    if drive < 0:
        raise ValueError("drive amplitude must be non-negative")
    quiet = _noise_free(rp)
    gain = rp.activation_gain
    gaps: List[float] = []
    worst_steps: Optional[int] = 0
    converged = True
    for trial in range(trials):
        rng = derive_rng(seed, f"echo_state/{trial}")
        inputs = rng.uniform(-drive, drive, size=(horizon, topo.m))
        a = ReservoirState.for_topology(topo, rng.uniform(-gain, gain, size=(topo.depth, topo.n)))
        b = ReservoirState.for_topology(topo, rng.uniform(-gain, gain, size=(topo.depth, topo.n)))
        # Noise is off, so the generator passed to step is never drawn from for the ideal backend
        noise = derive_rng(seed, f"echo_state/{trial}/noise")
        zero_fb = np.zeros(topo.p)
        gap = float(np.max(np.abs(a.current - b.current)))
        hit = None
        for t in range(horizon):
            step(a, inputs[t], zero_fb, topo, quiet, noise)
            step(b, inputs[t], zero_fb, topo, quiet, noise)
            gap = float(np.max(np.abs(a.current - b.current)))
            if gap < tol:
                hit = t + 1
                break
        gaps.append(gap)
        if hit is None:
            converged = False
            worst_steps = None
        elif worst_steps is not None:
            worst_steps = max(worst_steps, hit)
    return EchoStateReport(converged=converged, final_gap=max(gaps) if gaps else 0.0,
                           steps_to_converge=worst_steps if converged else None, gaps=gaps)


def memory_capacity(topo: Topology, rp: ReservoirParams, max_lag: int = 20, length: int = 2000,
                    seed: int = 0, ridge: float = 1e-8) -> MemoryCapacity:
    """Short-term memory of the reservoir.

    Drives input channel 0 with i.i.d. uniform noise (no feedback) and trains
    one readout per lag k to reproduce ``u[t - k]``. The capacity for lag k is
    the squared correlation between that readout's output and the delayed
    input; the total is their sum.

    Recurrent edges read x[t - d] with d >= 1, so the input reaches another
    neuron two steps after it arrives at the earliest. The lag-1 value only
    comes through the self-decay term and is usually lower than lags 2 and 3;
    the profile fades from its peak.
    """
    if max_lag < 1:
        raise ValueError("max_lag must be at least 1")
    rng = derive_rng(seed, "memory_capacity/input")
    u = np.zeros((length, topo.m))
    u[:, 0] = rng.uniform(-1.0, 1.0, size=length)
    skip = rp.washout + max_lag
    if length - skip < 2:
        raise ValueError("length leaves no samples after washout and the largest lag")
    result = run(topo, rp, u, NoFeedback(), seed=seed, washout=0)
    x = result.states[:, skip:]
    per_lag = []
    for k in range(1, max_lag + 1):
        target = u[skip - k:length - k, 0]
        w = train_readout(x, target, ridge=ridge)
        y = readout(w, x)[0]
        if np.std(y) == 0.0 or np.std(target) == 0.0:
            per_lag.append(0.0)
            continue
        r = np.corrcoef(y, target)[0, 1]
        per_lag.append(float(r * r))
    return MemoryCapacity(per_lag=per_lag, total=float(sum(per_lag)))
