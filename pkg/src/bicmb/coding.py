"""Rate-1/n binary convolutional codes.

Provides trellis construction from octal generator polynomials, a
terminated encoder, a batched soft-decision Viterbi decoder, and an
error-event search that yields the free distance and the distance
spectrum with per-event input weights and error-bit positions.

Conventions
-----------
The encoder register holds the current input bit in its most significant
position: with constraint length ``K`` and state ``s`` (the previous
``K - 1`` inputs, most recent in the MSB of the state), feeding input
``u`` forms ``r = (u << (K - 1)) | s``, emits ``parity(r & g)`` for each
generator ``g``, and moves to state ``r >> 1``.  Output bits of one step
are ordered first generator first.  Ties in the decoder resolve toward
the lower-indexed predecessor state, so an all-equal-metric input decodes
to the all-zero message.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CodeSpec",
    "Trellis",
    "SpectrumEntry",
    "DistanceSpectrum",
    "build_trellis",
    "encode",
    "viterbi_decode",
    "free_distance",
    "distance_spectrum",
]

# Events kept per distance in the spectrum; counts stay exact beyond it.
EVENT_STORAGE_CAP = 10_000

# Paths longer than this many branches without remerging indicate a
# zero-weight loop (catastrophic encoder), so the search aborts.
_MAX_EVENT_SPAN_FACTOR = 4


@dataclass(frozen=True)
class CodeSpec:
    """Rate-1/n convolutional code described by its generator taps.

    Parameters
    ----------
    generators : tuple of int
        Tap masks as plain integers (parse octal notation at the call
        site, e.g. ``CodeSpec.from_octal("133,171")``).
    constraint_length : int
        Number of register taps K; the code has ``2**(K - 1)`` states.
    """

    generators: tuple[int, ...]
    constraint_length: int

    def __post_init__(self):
        if len(self.generators) < 2:
            raise ValueError("need at least two generator polynomials")
        if self.constraint_length < 2:
            raise ValueError("constraint length must be at least 2")
        for g in self.generators:
            if not 0 < g < (1 << self.constraint_length):
                raise ValueError(
                    f"generator {g:#o} does not fit constraint length "
                    f"{self.constraint_length}"
                )

    @classmethod
    def from_octal(cls, text: str, constraint_length: int | None = None) -> "CodeSpec":
        """Parse a comma-separated octal generator list like ``"133,171"``."""
        try:
            gens = tuple(int(tok, 8) for tok in text.split(","))
        except ValueError as exc:
            raise ValueError(f"bad octal generator list {text!r}") from exc
        if constraint_length is None:
            constraint_length = max(g.bit_length() for g in gens)
        return cls(gens, constraint_length)

    @property
    def n_out(self) -> int:
        """Coded bits emitted per input bit."""
        return len(self.generators)

    @property
    def rate(self) -> float:
        return 1.0 / self.n_out


@dataclass(frozen=True)
class Trellis:
    """State-transition tables for one code, shared by encoder and decoder.

    Attributes
    ----------
    next_state, out_pattern : (S, 2) int arrays
        Successor state and emitted bit pattern for (state, input).  The
        pattern packs the n output bits with generator 0 in the MSB.
    pred_state, pred_input, pred_pattern : (S, 2) int arrays
        The two incoming transitions of each state, sorted by ascending
        predecessor state (decoder ties break toward index 0).
    taps : (n, K) uint8 array
        taps[j, i] multiplies input u[t - i] in generator j, so row j is
        the bit expansion of generators[j], MSB first.
    """

    spec: CodeSpec
    next_state: np.ndarray
    out_pattern: np.ndarray
    pred_state: np.ndarray
    pred_input: np.ndarray
    pred_pattern: np.ndarray
    taps: np.ndarray

    @property
    def n_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def n_out(self) -> int:
        return self.spec.n_out


def build_trellis(spec: CodeSpec) -> Trellis:
    """Tabulate transitions, outputs, and sorted predecessor lists."""
    K = spec.constraint_length
    n = spec.n_out
    n_states = 1 << (K - 1)

    next_state = np.zeros((n_states, 2), dtype=np.int64)
    out_pattern = np.zeros((n_states, 2), dtype=np.int64)
    for s in range(n_states):
        for u in (0, 1):
            r = (u << (K - 1)) | s
            pattern = 0
            for g in spec.generators:
                pattern = (pattern << 1) | ((r & g).bit_count() & 1)
            next_state[s, u] = r >> 1
            out_pattern[s, u] = pattern

    pred_state = np.zeros((n_states, 2), dtype=np.int64)
    pred_input = np.zeros((n_states, 2), dtype=np.int64)
    pred_pattern = np.zeros((n_states, 2), dtype=np.int64)
    fill = np.zeros(n_states, dtype=np.int64)
    # Scanning states in ascending order keeps each predecessor list sorted.
    for s in range(n_states):
        for u in (0, 1):
            t = next_state[s, u]
            k = fill[t]
            pred_state[t, k] = s
            pred_input[t, k] = u
            pred_pattern[t, k] = out_pattern[s, u]
            fill[t] += 1
    if not np.all(fill == 2):
        raise ValueError("trellis is not 2-regular; bad generator set")

    taps = np.zeros((n, K), dtype=np.uint8)
    for j, g in enumerate(spec.generators):
        for i in range(K):
            taps[j, i] = (g >> (K - 1 - i)) & 1

    return Trellis(spec, next_state, out_pattern,
                   pred_state, pred_input, pred_pattern, taps)


def encode(trellis: Trellis, message: np.ndarray, terminate: bool = True) -> np.ndarray:
    """Encode a binary message, flushing the register when ``terminate``.

    Returns the coded bits interleaved first-generator-first: shape
    ``(n * (len(message) + K - 1),)`` when terminated, ``(n * len(message),)``
    otherwise.
    """
    msg = np.asarray(message)
    if msg.ndim != 1 or msg.size == 0:
        raise ValueError("message must be a non-empty 1-D bit array")
    if not np.all((msg == 0) | (msg == 1)):
        raise ValueError("message must be binary")
    msg = msg.astype(np.int64)

    n = trellis.n_out
    K = trellis.spec.constraint_length
    steps = msg.size + K - 1 if terminate else msg.size
    out = np.empty((steps, n), dtype=np.uint8)
    for j in range(n):
        # Full convolution covers the K - 1 flush steps exactly.
        c = np.convolve(msg, trellis.taps[j].astype(np.int64)) & 1
        out[:, j] = c[:steps]
    return out.reshape(-1)


def _pattern_bits(n: int) -> np.ndarray:
    """(2**n, n) table: bit j (generator j) of each packed output pattern."""
    p = np.arange(1 << n)
    shifts = n - 1 - np.arange(n)
    return (p[:, None] >> shifts[None, :]) & 1


def viterbi_decode(trellis: Trellis, branch_costs: np.ndarray,
                   terminated: bool = True) -> np.ndarray:
    """Minimum-cost sequence decoding from per-bit soft costs.

    Parameters
    ----------
    branch_costs : array, shape (T, n, 2) or (B, T, n, 2)
        ``branch_costs[..., t, j, b]`` is the cost of deciding coded bit j
        of step t equal to b.  A branch costs the sum over its n bits, a
        path the sum over its branches.
    terminated : bool
        When True the path is forced to end in state 0 and the K - 1
        flush bits are stripped, returning ``T - (K - 1)`` message bits.

    Returns
    -------
    uint8 array of message bits, shape (msg_len,) or (B, msg_len)
    matching the input batching.
    """
    costs = np.asarray(branch_costs, dtype=np.float64)
    single = costs.ndim == 3
    if single:
        costs = costs[None]
    if costs.ndim != 4 or costs.shape[2] != trellis.n_out or costs.shape[3] != 2:
        raise ValueError("branch_costs must have shape (..., T, n, 2)")
    K = trellis.spec.constraint_length
    T = costs.shape[1]
    if terminated and T < K:
        raise ValueError("terminated decoding needs at least K steps")

    bits = _viterbi_batch(trellis, costs, terminated)
    return bits[0] if single else bits


def _viterbi_batch(trellis: Trellis, costs: np.ndarray, terminated: bool) -> np.ndarray:
    B, T, n, _ = costs.shape
    n_states = trellis.n_states
    P = 1 << n

    # Cost of each packed output pattern at each step: (B, T, P).
    pb = _pattern_bits(n)
    jidx = np.broadcast_to(np.arange(n), (P, n))
    pattern_costs = costs[:, :, jidx, pb].sum(axis=3)

    pred_state = trellis.pred_state
    pred_pattern = trellis.pred_pattern

    metric = np.full((B, n_states), np.inf)
    metric[:, 0] = 0.0  # encoder always starts in state 0
    survivor = np.empty((T, B, n_states), dtype=np.uint8)
    for t in range(T):
        cand = metric[:, pred_state] + pattern_costs[:, t][:, pred_pattern]
        # argmin keeps the first minimum: the lower predecessor state wins ties
        best = np.argmin(cand, axis=2)
        survivor[t] = best
        metric = np.take_along_axis(cand, best[:, :, None], axis=2)[:, :, 0]

    if terminated:
        state = np.zeros(B, dtype=np.int64)
    else:
        state = np.argmin(metric, axis=1)

    rows = np.arange(B)
    decided = np.empty((B, T), dtype=np.uint8)
    for t in range(T - 1, -1, -1):
        k = survivor[t, rows, state]
        decided[:, t] = trellis.pred_input[state, k]
        state = pred_state[state, k]

    if terminated:
        K = trellis.spec.constraint_length
        return decided[:, : T - (K - 1)]
    return decided


def _min_weight_to_zero(trellis: Trellis) -> np.ndarray:
    """Per-state minimum output weight of any path remerging with state 0.

    Dijkstra over the transition graph with branch weights equal to the
    Hamming weight of the emitted pattern.  Entry 0 is 0 by convention.
    """
    n_states = trellis.n_states
    w_branch = _popcount_table(trellis.spec.n_out)[trellis.out_pattern]

    dist = np.full(n_states, np.inf)
    dist[0] = 0.0
    # Relax over reversed edges: dist[s] = min over (s,u) of w + dist[next].
    heap = [(0.0, 0)]
    done = np.zeros(n_states, dtype=bool)
    while heap:
        d, t = heapq.heappop(heap)
        if done[t]:
            continue
        done[t] = True
        for k in range(2):
            s = int(trellis.pred_state[t, k])
            if s == 0:
                continue  # leaving state 0 starts an event, not a remerge
            nd = d + w_branch[s, trellis.pred_input[t, k]]
            if nd < dist[s]:
                dist[s] = nd
                heapq.heappush(heap, (nd, s))
    return dist


def _popcount_table(n_bits: int) -> np.ndarray:
    table = np.zeros(1 << n_bits, dtype=np.int64)
    for p in range(1 << n_bits):
        table[p] = p.bit_count()
    return table


def free_distance(trellis: Trellis, d_max: int = 64) -> int:
    """Minimum Hamming weight over paths that diverge from and remerge
    with the all-zero state."""
    w_branch = _popcount_table(trellis.spec.n_out)[trellis.out_pattern]
    dist = _min_weight_to_zero(trellis)
    first = int(trellis.next_state[0, 1])
    d = w_branch[0, 1] + dist[first]
    if not np.isfinite(d) or d > d_max:
        raise ValueError(f"no error event of weight <= {d_max} found")
    return int(d)


@dataclass
class SpectrumEntry:
    """All error events of one Hamming distance.

    ``positions`` stores, for up to ``EVENT_STORAGE_CAP`` events, the
    coded-bit indices (relative to the event start) where the event
    differs from the all-zero path.  ``event_count`` and
    ``total_input_weight`` stay exact even when storage is truncated.
    """

    distance: int
    event_count: int = 0
    total_input_weight: int = 0
    positions: list[np.ndarray] = field(default_factory=list)
    input_weights: list[int] = field(default_factory=list)
    storage_truncated: bool = False


@dataclass
class DistanceSpectrum:
    """Error events of a code grouped by distance, up to ``d_max``."""

    d_free: int
    d_max: int
    entries: dict[int, SpectrumEntry]

    def distances(self) -> list[int]:
        return sorted(self.entries)

    def multiplicity(self, d: int) -> int:
        return self.entries[d].event_count if d in self.entries else 0

    def input_weight(self, d: int) -> int:
        """Summed message-bit weight over all events at distance d."""
        return self.entries[d].total_input_weight if d in self.entries else 0


def distance_spectrum(trellis: Trellis, d_max: int,
                      event_cap: int = EVENT_STORAGE_CAP) -> DistanceSpectrum:
    """Enumerate every error event of output weight <= d_max.

    Depth-first search over paths leaving state 0, pruned with the exact
    minimum remaining weight to remerge, so only paths that can still
    finish within ``d_max`` are expanded.
    """
    d_free_val = free_distance(trellis, d_max=max(d_max, 1))
    if d_max < d_free_val:
        raise ValueError(f"d_max={d_max} is below the free distance {d_free_val}")

    n = trellis.spec.n_out
    w_branch = _popcount_table(n)[trellis.out_pattern]
    to_zero = _min_weight_to_zero(trellis)
    max_span = _MAX_EVENT_SPAN_FACTOR * trellis.n_states * (d_max + 1)

    bit_lists = [
        np.flatnonzero([(p >> (n - 1 - j)) & 1 for j in range(n)])
        for p in range(1 << n)
    ]
    entries: dict[int, SpectrumEntry] = {}

    # Stack frames: (state, accumulated weight, input weight, step index,
    # list of 1-bit positions so far).  Events always begin with input 1.
    first = int(trellis.next_state[0, 1])
    w0 = int(w_branch[0, 1])
    stack = [(first, w0, 1, 1, [bit_lists[int(trellis.out_pattern[0, 1])]])]
    while stack:
        state, weight, in_w, step, pos = stack.pop()
        if step > max_span:
            raise ValueError(
                "error-event search exceeded the span bound; the code has "
                "a zero-weight loop (catastrophic generator set)"
            )
        for u in (0, 1):
            w_new = weight + int(w_branch[state, u])
            ns = int(trellis.next_state[state, u])
            if w_new + to_zero[ns] > d_max:
                continue
            p = int(trellis.out_pattern[state, u])
            pos_new = pos if p == 0 else pos + [bit_lists[p] + step * n]
            if ns == 0:
                entry = entries.setdefault(w_new, SpectrumEntry(distance=w_new))
                entry.event_count += 1
                entry.total_input_weight += in_w + u
                if len(entry.positions) < event_cap:
                    entry.positions.append(
                        np.concatenate(pos_new).astype(np.int64))
                    entry.input_weights.append(in_w + u)
                else:
                    entry.storage_truncated = True
            else:
                stack.append((ns, w_new, in_w + u, step + 1, pos_new))

    return DistanceSpectrum(d_free=d_free_val, d_max=d_max, entries=entries)
