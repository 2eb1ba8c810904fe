"""Decision procedures for membership of concrete in abstract scenarios.

The word problem follows the given trajectory through the instance's
successor relation instead of enumerating the scenario set, checks the
conjoined formula on the full trace, and applies the instance acceptance
condition. The prefix problem quantifies over all instance-valid
horizon-length completions of the prefix, with the formula as the
acceptance condition, which makes its TRUE and FALSE verdicts
irrevocable under any continuation the world permits. The stream monitor
latches accordingly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core import Scene, Trajectory
from .errors import HorizonError, LengthError
from .formulas import Verdict3, evaluate3
from .logic import AbstractScenario, Path, _check_conforms, _full_eval_ok

#: Node budget for prefix-tree exploration; exhaustion yields UNKNOWN.
DEFAULT_EXPLORE_BUDGET = 100_000


class Verdict(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass(frozen=True)
class WordReport:
    verdict: Verdict
    violation_index: int | None
    reason: str


def _word_report(c: Trajectory, scenario: AbstractScenario) -> WordReport:
    inst = scenario.instance
    _check_conforms(scenario, c)
    if len(c.samples) != inst.full_length():
        raise LengthError(
            f"word problem needs the full horizon length {inst.full_length()}, "
            f"got {len(c.samples)}"
        )
    samples = c.samples
    if not inst.allows_initial(samples[0]):
        return WordReport(Verdict.REJECTED, 0, "starting scene not admissible")
    for i in range(len(samples) - 1):
        if not inst.allows_step(samples[: i + 1], samples[i + 1]):
            return WordReport(
                Verdict.REJECTED, i + 1, f"transition at step {i + 1} not admissible"
            )
    conj = scenario.conjoined()
    verdict = evaluate3(conj, samples, inst.horizon, scene_tol=inst.scene_tol)
    if verdict is not Verdict3.TRUE:
        return WordReport(Verdict.REJECTED, None, "constraint formula not satisfied")
    if not inst.accepts_path(samples):
        return WordReport(Verdict.REJECTED, None, "instance acceptance failed")
    return WordReport(Verdict.ACCEPTED, None, "accepted")


def monitor_word(c: Trajectory, scenario: AbstractScenario) -> Verdict:
    """Decide whether a full-length trajectory belongs to the scenario."""
    return _word_report(c, scenario).verdict


def monitor_word_report(c: Trajectory, scenario: AbstractScenario) -> WordReport:
    """Word verdict plus the index of the first inadmissible step, if any."""
    return _word_report(c, scenario)


def _prefix_is_path_valid(samples: Path, scenario: AbstractScenario) -> bool:
    inst = scenario.instance
    if not samples:
        return True
    if not inst.allows_initial(samples[0]):
        return False
    return all(
        inst.allows_step(samples[: i + 1], samples[i + 1])
        for i in range(len(samples) - 1)
    )


def _explore(
    scenario: AbstractScenario,
    samples: Path,
    conj,
    budget: int,
) -> Verdict3:
    """Bounded DFS over the instance tree under a prefix.

    The tree grows through the raw successor relation; the conjoined
    formula acts as the acceptance condition on full-length leaves, so a
    TRUE verdict means every instance-valid continuation is accepted and
    cannot be revoked by feeding more scenes. Returns UNKNOWN as soon as
    both an accepted and a rejected completion are witnessed or the node
    budget runs out (inconclusive); obviously oversized trees are
    declared inconclusive up front instead of crawling the budget.
    """
    inst = scenario.instance
    remaining = inst.full_length() - len(samples)
    fanout = len(tuple(inst.successors(samples))) if remaining else 0
    if fanout > 1 and remaining * math.log(fanout) > math.log(max(budget, 2)):
        return Verdict3.UNKNOWN
    found_accept = False
    found_reject = False
    nodes = 0
    stack: list[Path] = [samples]
    while stack:
        nodes += 1
        if nodes > budget:
            return Verdict3.UNKNOWN
        p = stack.pop()
        if len(p) == inst.full_length():
            if _full_eval_ok(scenario, p, conj):
                found_accept = True
            else:
                found_reject = True
        else:
            kids = tuple(inst.successors(p))
            if not kids:
                found_reject = True
            else:
                # Prune subtrees whose verdict is already settled by the
                # monotone formula status: FALSE subtrees only reject.
                for cand in kids:
                    nxt = p + (cand,)
                    status = evaluate3(
                        conj, nxt, inst.horizon, scene_tol=inst.scene_tol
                    )
                    if status is Verdict3.FALSE:
                        found_reject = True
                    elif (
                        status is Verdict3.TRUE
                        and inst.accepts is None
                    ):
                        found_accept = True
                    else:
                        stack.append(nxt)
        if found_accept and found_reject:
            return Verdict3.UNKNOWN
    if found_accept:
        return Verdict3.TRUE
    return Verdict3.FALSE


def monitor_prefix(
    c: Trajectory | None,
    scenario: AbstractScenario,
    explore_budget: int = DEFAULT_EXPLORE_BUDGET,
) -> Verdict3:
    """Three-valued verdict for a partial trace.

    TRUE iff every reachable horizon-length extension is accepted, FALSE
    iff none is. The monotone formula verdict decides most prefixes
    outright; otherwise a bounded tree exploration settles the rest and
    reports UNKNOWN when its node budget runs out.

    ``c=None`` stands for the empty prefix (nothing observed yet).
    """
    inst = scenario.instance
    if c is None:
        samples: Path = ()
    else:
        _check_conforms(scenario, c)
        if len(c.samples) > inst.full_length():
            raise LengthError(
                f"prefix longer than the horizon length {inst.full_length()}"
            )
        samples = c.samples
    if not _prefix_is_path_valid(samples, scenario):
        return Verdict3.FALSE
    conj = scenario.conjoined()
    status = evaluate3(conj, samples, inst.horizon, scene_tol=inst.scene_tol)
    if status is Verdict3.FALSE:
        return Verdict3.FALSE
    if len(samples) == inst.full_length():
        ok = status is Verdict3.TRUE and inst.accepts_path(samples)
        return Verdict3.TRUE if ok else Verdict3.FALSE
    if status is Verdict3.TRUE and inst.accepts is None:
        # Monotone TRUE cannot flip, and with trivial acceptance every
        # completion (successor sets are nonempty below the horizon) is
        # accepted. The empty prefix additionally needs some admissible
        # start to exist.
        if samples or inst.initial_scenes is None or len(inst.initial_scenes) > 0:
            return Verdict3.TRUE
    if not samples:
        if inst.initial_scenes is None or inst.initial_allows is not None:
            # The admissible starts are not a finite enumerable set.
            return Verdict3.UNKNOWN
        verdicts = {
            _explore(scenario, (s,), conj, explore_budget)
            for s in inst.initial_scenes
        }
        if not verdicts:
            return Verdict3.FALSE
        if verdicts == {Verdict3.TRUE}:
            return Verdict3.TRUE
        if verdicts == {Verdict3.FALSE}:
            return Verdict3.FALSE
        return Verdict3.UNKNOWN
    return _explore(scenario, samples, conj, explore_budget)


class StreamMonitor:
    """Single-owner stateful monitor fed one scene per grid step.

    After each step the verdict equals the prefix verdict of everything
    fed so far; TRUE and FALSE are terminal.
    """

    def __init__(
        self,
        scenario: AbstractScenario,
        explore_budget: int = DEFAULT_EXPLORE_BUDGET,
    ):
        self.scenario = scenario
        self.explore_budget = explore_budget
        self._samples: list[Scene] = []
        self._verdict = monitor_prefix(None, scenario, explore_budget)
        self._latched = self._verdict in (Verdict3.TRUE, Verdict3.FALSE)

    @property
    def verdict(self) -> Verdict3:
        return self._verdict

    @property
    def fed(self) -> int:
        return len(self._samples)

    def step(self, scene: Scene) -> Verdict3:
        inst = self.scenario.instance
        if len(self._samples) >= inst.full_length():
            raise HorizonError("stream already consumed the full horizon")
        self._samples.append(scene)
        if self._latched:
            return self._verdict
        traj = Trajectory(
            inst.schema, inst.grid(len(self._samples)), tuple(self._samples)
        )
        self._verdict = monitor_prefix(traj, self.scenario, self.explore_budget)
        if self._verdict in (Verdict3.TRUE, Verdict3.FALSE):
            self._latched = True
        return self._verdict


def monitor_stream(scenario: AbstractScenario, **kwargs) -> StreamMonitor:
    return StreamMonitor(scenario, **kwargs)
