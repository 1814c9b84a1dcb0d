"""Trace I/O, single runs, Monte Carlo expectation over seeds, and comparison tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .model import CacheState, Item, ModelError, ProblemParams, apply_request, needs_eviction
from .oracle import MAX_DISTINCT, opt_cost
from .phases import PhaseTracker
from .policies import Policy, PolicyKind


class TraceError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


class InvariantViolation(AssertionError):
    pass


# -- traces -----------------------------------------------------------------


def parse_trace(text: str, source="<trace>") -> list[Item]:
    """One request per line: ``<type_token> <item_token>``; ``#`` comments, blanks ignored."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TraceError(source, lineno, f"expected '<type> <item>', got {raw!r}")
        out.append(Item(parts[0], parts[1]))
    return out


def read_trace(path) -> list[Item]:
    path = Path(path)
    return parse_trace(path.read_text(encoding="utf-8"), source=path)


def format_trace(sigma: Iterable[Item], header: Optional[str] = None) -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines.extend(f"{e.type_id} {e.item_id}" for e in sigma)
    return "\n".join(lines) + "\n"


def write_trace(path, sigma: Iterable[Item], header: Optional[str] = None) -> None:
    Path(path).write_text(format_trace(sigma, header), encoding="utf-8")


# -- seeds ------------------------------------------------------------------


def derive_seed(master: int, index: int) -> int:
    """Per-run seed: first 8 bytes of sha256(f"{master}:{index}"), big-endian, 63 bits."""
    digest = hashlib.sha256(f"{master}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def derive_seeds(master: int, count: int) -> list[int]:
    return [derive_seed(master, i) for i in range(count)]


# -- simulation -------------------------------------------------------------


@dataclass
class Event:
    index: int
    item: Item
    phase: int
    fault: bool
    victim: Optional[Item]


class Simulation:
    """Replays requests one at a time under one policy, checking invariants.

    Per request: phase update, hole sampling on the issue-time cache, then
    hit / insert / evict, then the marking, feasibility and type-preference
    checks. The structural check on represented types needs the closed
    phase type sets and is completed in :meth:`finish`.
    """

    def __init__(self, params: ProblemParams, kind: PolicyKind, seed: Optional[int] = 0,
                 check: bool = True, log: bool = True):
        self.params = params
        self.kind = kind
        self.policy = Policy(kind, params, seed)
        self.state = CacheState(params)
        self.tracker = PhaseTracker(params)
        self.faults = 0
        self.fault_indices: list = []
        self.events: list = [] if log else None
        self.check = check
        self._represented_in_phase: dict = {}
        self._active: Optional[set] = None
        self._active_phase = 0

    @property
    def index(self) -> int:
        return self.tracker.processed

    def step(self, e: Item) -> bool:
        j = self.tracker.processed + 1
        ev = self.tracker.observe(j, e)
        self.tracker.record_holes(ev.phase, self.state.cached)
        victim = None
        fault = e not in self.state.cached
        if fault:
            if needs_eviction(self.state, e):
                victim = self.policy.victim(self.state, self.tracker, e)
                if self.check and self.policy.kind.is_marking and self.tracker.is_marked(victim):
                    raise InvariantViolation(
                        f"{self.kind.value} evicted marked item {victim} at request {j}"
                    )
            try:
                self.state, _ = apply_request(self.state, e, victim)
            except ModelError as exc:
                raise InvariantViolation(f"request {j}: {exc}") from exc
            self.faults += 1
            self.fault_indices.append(j)
        self.policy.on_request(j, e)
        if self.events is not None:
            self.events.append(Event(j, e, ev.phase, fault, victim))
        if self.check:
            self._check_step(j, ev.phase)
        return fault

    def _check_step(self, j: int, phase: int) -> None:
        state, params = self.state, self.params
        if state.overflow > params.n:
            raise InvariantViolation(f"request {j}: cache infeasible")
        kind = self.policy.kind
        if not kind.is_marking:
            return
        rep = state.represented_types()
        self._represented_in_phase.setdefault(phase, set()).update(rep)
        if not kind.is_type_preference:
            return
        prev = self.tracker.prev_types()
        marks = self.tracker.marks
        active = {
            t for t in rep & prev
            if any(e.type_id == t and e not in marks.get(t, ()) for e in state.cached)
        }
        if self._active_phase == phase and not active <= self._active:
            raise InvariantViolation(
                f"request {j}: active types grew from {sorted(self._active)} to {sorted(active)}"
            )
        self._active, self._active_phase = active, phase

    def run(self, sigma: Iterable[Item]) -> "Simulation":
        for e in sigma:
            self.step(e)
        return self

    def finish(self):
        stats = self.tracker.finalize()
        phase_faults = [0] * stats.num_phases
        where = {j: i for i, p in enumerate(stats.P) for j in p}
        for j in self.fault_indices:
            phase_faults[where[j]] += 1
        if self.check and self.policy.kind.is_marking:
            bound = self.params.capacity_ratio
            for i, f in enumerate(phase_faults[: stats.i_end], start=1):
                if f > bound:
                    raise InvariantViolation(f"{f} faults in phase {i} exceeds {bound}")
                if len(stats.T(i)) > self.params.n + 1:
                    raise InvariantViolation(f"phase {i} closed more than n+1 types")
            if stats.incomplete and phase_faults[-1] > len(stats.items[-1]):
                raise InvariantViolation("marked item faulted twice in the open phase")
            for i, rep in self._represented_in_phase.items():
                allowed = stats.T(i - 1) | stats.T(i)
                if not rep <= allowed:
                    raise InvariantViolation(
                        f"phase {i}: represented types {sorted(rep - allowed)} "
                        f"outside the types of phases {i - 1} and {i}"
                    )
        return stats, phase_faults


# -- reports ----------------------------------------------------------------


@dataclass
class SimReport:
    policy: str
    n: int
    k: int
    seeds: list
    length: int
    faults: float
    faults_stderr: Optional[float]
    complete_phases: int
    phase_faults: list
    stats: dict
    opt_cost: Optional[int] = None
    ratio_vs_opt: Optional[float] = None
    ratio_vs_phase_bound: float = 0.0
    events: Optional[list] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("events")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _ratio(num, den) -> Optional[float]:
    if den is None:
        return None
    return num / max(1, den)


def _desk_scale(sigma) -> bool:
    return len(set(sigma)) <= MAX_DISTINCT


def run(sigma: Sequence[Item], params: ProblemParams, policy: PolicyKind, seed: int = 0,
        with_opt: bool = False, log: bool = False) -> SimReport:
    """Replay ``sigma`` once; deterministic given ``seed``."""
    sim = Simulation(params, policy, seed, log=log).run(sigma)
    stats, phase_faults = sim.finish()
    opt = opt_cost(sigma, params, witness=False).cost if with_opt else None
    return SimReport(
        policy=policy.value,
        n=params.n,
        k=params.k,
        seeds=[seed],
        length=len(sigma),
        faults=sim.faults,
        faults_stderr=None,
        complete_phases=stats.i_end,
        phase_faults=phase_faults,
        stats=stats.to_dict(),
        opt_cost=opt,
        ratio_vs_opt=_ratio(sim.faults, opt),
        ratio_vs_phase_bound=sim.faults / max(1, stats.i_end),
        events=sim.events,
    )


def expect(sigma: Sequence[Item], params: ProblemParams, policy: PolicyKind,
           seeds: Sequence[int], with_opt: bool = False) -> SimReport:
    """Mean and standard error of the fault count over independent seeded runs."""
    if not seeds:
        raise ValueError("need at least one seed")
    reports = [run(sigma, params, policy, s) for s in seeds]
    opt = opt_cost(sigma, params, witness=False).cost if with_opt else None
    if len(reports) == 1:
        rep = reports[0]
        rep.opt_cost, rep.ratio_vs_opt = opt, _ratio(rep.faults, opt)
        return rep
    faults = [r.faults for r in reports]
    mean = statistics.fmean(faults)
    stderr = statistics.stdev(faults) / math.sqrt(len(faults))
    per_phase = [statistics.fmean(col) for col in zip(*(r.phase_faults for r in reports))]
    stats = dict(reports[0].stats)
    stats["h"] = {
        i: statistics.fmean(r.stats["h"][i] for r in reports) for i in stats["h"]
    }
    return SimReport(
        policy=policy.value,
        n=params.n,
        k=params.k,
        seeds=list(seeds),
        length=len(sigma),
        faults=mean,
        faults_stderr=stderr,
        complete_phases=reports[0].complete_phases,
        phase_faults=per_phase,
        stats=stats,
        opt_cost=opt,
        ratio_vs_opt=_ratio(mean, opt),
        ratio_vs_phase_bound=mean / max(1, reports[0].complete_phases),
    )


COMPARE_COLUMNS = (
    ("policy", str),
    ("n", int),
    ("k", int),
    ("runs", int),
    ("length", int),
    ("faults_mean", float),
    ("faults_stderr", float),
    ("complete_phases", int),
    ("opt_cost", int),
    ("ratio_vs_opt", float),
    ("ratio_vs_phase_bound", float),
    ("prefix_slope", float),
    ("prefix_intercept", float),
)


def prefix_fit(sigma, params, policy: PolicyKind, seeds) -> tuple:
    """Least-squares line of mean online faults against OPT over all prefixes.

    The slope estimates the competitive ratio with the additive constant
    split off into the intercept.
    """
    opt = opt_cost(sigma, params, witness=False).prefix_costs
    cum = [0.0] * len(sigma)
    for s in seeds:
        sim = Simulation(params, policy, s, log=False)
        total = 0
        for j, e in enumerate(sigma):
            total += sim.step(e)
            cum[j] += total
    cum = [c / len(seeds) for c in cum]
    if len(set(opt)) < 2:
        return None, None
    fit = statistics.linear_regression(opt, cum)
    return fit.slope, fit.intercept


def compare(sigma: Sequence[Item], params: ProblemParams, policies: Sequence[PolicyKind],
            seeds: Sequence[int]) -> list[dict]:
    desk = _desk_scale(sigma)
    opt = opt_cost(sigma, params, witness=False).cost if desk and sigma else None
    rows = []
    for kind in policies:
        rep = expect(sigma, params, kind, seeds)
        slope = intercept = None
        if desk and sigma:
            slope, intercept = prefix_fit(sigma, params, kind, seeds)
        rows.append({
            "policy": kind.value,
            "n": params.n,
            "k": params.k,
            "runs": len(seeds),
            "length": len(sigma),
            "faults_mean": float(rep.faults),
            "faults_stderr": float(rep.faults_stderr or 0.0),
            "complete_phases": rep.complete_phases,
            "opt_cost": opt,
            "ratio_vs_opt": _ratio(rep.faults, opt),
            "ratio_vs_phase_bound": rep.ratio_vs_phase_bound,
            "prefix_slope": slope,
            "prefix_intercept": intercept,
        })
    return rows


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([c for c, _ in COMPARE_COLUMNS])
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c, _ in COMPARE_COLUMNS])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    expected = [c for c, _ in COMPARE_COLUMNS]
    if header != expected:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        rows.append({
            c: (None if cell == "" else conv(cell))
            for (c, conv), cell in zip(COMPARE_COLUMNS, rec)
        })
    return rows


def rows_to_json(rows: Sequence[dict]) -> str:
    return json.dumps(list(rows), indent=2, sort_keys=True)
