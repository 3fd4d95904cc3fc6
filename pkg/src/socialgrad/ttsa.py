"""Two-timescale strategy-incentive iteration.

Discrete counterpart of the continuous incentive flow. Strategies move on
the fast timescale through a learning rule f,

    x_{k+1} = x_k + a_k (f(x_k, p_k) - x_k),

and the incentive moves on the slow timescale through a gated ascent step,

    p_{k+1} = p_k + b_k grad Phi(x_k) * 1{p_k + b_k grad Phi(x_k) in P_c},

so the incentive only ever occupies the forward-invariant sublevel set.
The indicator is evaluated by an inner equilibrium solve; the simulator is
the membership oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .flow import SublevelGeometry
from .games import GameModel, as_vector, project_box
from .records import TtsaRecord
from .solvers import ResponseOracle, ResponseSolverConfig, solve_response

__all__ = [
    "StepSchedule",
    "LearningRule",
    "TtsaConfig",
    "DiagnosticsSummary",
    "make_learning_rule",
    "learning_rule_ne",
    "learning_rule_br",
    "learning_rule_pg",
    "pg_contraction_factor",
    "br_flow_rate",
    "ttsa_step",
    "run_ttsa",
    "tracking_diagnostics",
]


@dataclass(frozen=True)
class StepSchedule:
    """Polynomially decaying step sizes a_k = a0 (k+offset)^-a_exp, likewise b_k.

    Exponents in (1/2, 1] give non-summable, square-summable sequences. The
    timescale separation b_exp > a_exp is what the convergence argument
    needs; violating it is allowed (for ablation runs) but warned about.
    a0 <= offset^a_exp keeps every a_k inside (0, 1] so the strategy update
    stays a convex combination.
    """

    a0: float = 1.0
    a_exp: float = 0.6
    b0: float = 1.0
    b_exp: float = 0.9
    offset: int = 1

    def __post_init__(self):
        if self.a0 <= 0 or self.b0 <= 0:
            raise ValueError("a0 and b0 must be positive")
        for name, e in (("a_exp", self.a_exp), ("b_exp", self.b_exp)):
            if not 0.5 < e <= 1.0:
                raise ValueError(f"{name}={e} must lie in (1/2, 1]")
        if self.offset < 1 or int(self.offset) != self.offset:
            raise ValueError("offset must be a positive integer")
        if self.a0 > self.offset ** self.a_exp:
            raise ValueError(
                f"a0={self.a0} exceeds offset^a_exp={self.offset ** self.a_exp:.6g}; "
                "a_k would leave (0, 1]"
            )
        if self.b_exp <= self.a_exp:
            warnings.warn(
                f"b_exp={self.b_exp} <= a_exp={self.a_exp}: no timescale "
                "separation; convergence guarantees do not apply",
                stacklevel=2,
            )

    def a(self, k):
        return self.a0 * (k + self.offset) ** (-self.a_exp)

    def b(self, k):
        return self.b0 * (k + self.offset) ** (-self.b_exp)


@dataclass(frozen=True)
class LearningRule:
    """Inner strategy-update rule f(x, p).

    kind "NE" applies the exact equilibrium response, "BR" the closed-form
    simultaneous best response (games exposing that structure only), "PG"
    one projected-gradient step with step eta. ``certificate`` records the
    rule's uniform convergence certificate: the per-application contraction
    factor toward x*(p) for NE (0.0) and PG (rho), and the exponential rate
    of the continuous best-response flow for BR.
    """

    kind: str
    eta: Optional[float] = None
    certificate: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("NE", "BR", "PG"):
            raise ValueError("kind must be one of 'NE', 'BR', 'PG'")
        if self.kind == "PG":
            if self.eta is None or self.eta <= 0:
                raise ValueError("PG rule requires a positive eta")
        elif self.eta is not None:
            raise ValueError(f"eta is only meaningful for the PG rule, not {self.kind}")


def _pg_eta_bound(game: GameModel) -> float:
    """Largest admissible PG step for this game.

    The generic contraction argument needs eta < m/L^2. Games with an
    everywhere-symmetric Jacobian (certified via a registered potential)
    admit the full gradient-descent range eta < 2/L, since there
    ||I - eta J(x)|| < 1 directly.
    """
    L = game.operator_norm
    if L is None:
        raise ValueError("game has no certified operator norm")
    if game.potential is not None:
        return 2.0 / L
    return game.monotonicity_m / (L * L)


def pg_contraction_factor(game: GameModel, eta: float) -> float:
    """Certified per-step contraction of the projected-gradient map.

    Inside the generic range eta < m/L^2 this is sqrt(1 - eta m + eta^2 L^2).
    Symmetric-Jacobian games get max(|1 - eta m/2|, |1 - eta L|) on the
    wider range eta < 2/L.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    L = game.operator_norm
    if L is None:
        raise ValueError("game has no certified operator norm")
    m = game.monotonicity_m
    if eta < m / (L * L):
        return math.sqrt(1.0 - eta * m + eta * eta * L * L)
    if game.potential is not None and eta < 2.0 / L:
        return max(abs(1.0 - eta * 0.5 * m), abs(1.0 - eta * L))
    raise ValueError(
        f"eta={eta} outside the admissible range (0, {_pg_eta_bound(game):.6g}) "
        "for this game"
    )


def br_flow_rate(game: GameModel) -> float:
    """Exponential decay rate of the continuous best-response flow.

    For the linear aggregative structure the flow dx/dt = f_BR(x,p) - x has
    error dynamics -Q^{-1}M e, whose logarithmic norm gives the rate
    lambda_min(Sym(Q^{-1}M)).
    """
    if game.br_structure is None or game.linear_matrix is None:
        raise ValueError("game does not expose a best-response structure")
    q, _ = game.br_structure
    qinv_m = game.linear_matrix / q[:, None]
    sym = 0.5 * (qinv_m + qinv_m.T)
    return float(np.linalg.eigvalsh(sym)[0])


def make_learning_rule(game: GameModel, kind: str, eta: Optional[float] = None) -> LearningRule:
    """Build a rule with its convergence certificate filled in."""
    if kind == "NE":
        return LearningRule(kind="NE", certificate=0.0)
    if kind == "BR":
        return LearningRule(kind="BR", certificate=br_flow_rate(game))
    if kind == "PG":
        if eta is None:
            raise ValueError("PG rule requires eta")
        return LearningRule(kind="PG", eta=eta,
                            certificate=pg_contraction_factor(game, eta))
    raise ValueError("kind must be one of 'NE', 'BR', 'PG'")


def learning_rule_ne(x, p, game: GameModel,
                     solver_cfg: Optional[ResponseSolverConfig] = None,
                     x0=None) -> np.ndarray:
    """Exact equilibrium response; ignores the current strategy."""
    if solver_cfg is None:
        solver_cfg = ResponseSolverConfig()
    res = solve_response(game, p, solver_cfg, x0=x0 if x0 is not None else x)
    return res.x_star


def learning_rule_br(x, p, game: GameModel) -> np.ndarray:
    """Simultaneous best response, projected into the box.

    Requires the game to expose its best-response structure (diagonal
    curvature q and coupling matrix) rather than silently approximating.
    """
    if game.br_structure is None:
        raise ValueError(f"game {game.name!r} does not support the BR rule")
    q, coupling = game.br_structure
    x = as_vector(x, dim=game.dim, name="x")
    p = as_vector(p, dim=game.dim, name="p")
    target = -(p + coupling @ x) / q
    return project_box(target, game.space)


def learning_rule_pg(x, p, game: GameModel, eta: float) -> np.ndarray:
    """One projected-gradient step on the incentivized pseudo-gradient."""
    if not 0.0 < eta < _pg_eta_bound(game):
        raise ValueError(
            f"eta={eta} outside the admissible range (0, {_pg_eta_bound(game):.6g})"
        )
    x = as_vector(x, dim=game.dim, name="x")
    p = as_vector(p, dim=game.dim, name="p")
    return project_box(x - eta * (game.g0(x) + p), game.space)


@dataclass(frozen=True)
class TtsaConfig:
    schedule: StepSchedule = field(default_factory=StepSchedule)
    rule: LearningRule = field(default_factory=lambda: LearningRule(kind="NE"))
    c: Optional[float] = None          # None: use the geometry's level
    max_iter: int = 10_000
    record_every: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.c is not None and self.c <= 0:
            raise ValueError("c must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")

    def to_dict(self) -> dict:
        return {
            "schedule": {
                "a0": self.schedule.a0, "a_exp": self.schedule.a_exp,
                "b0": self.schedule.b0, "b_exp": self.schedule.b_exp,
                "offset": self.schedule.offset,
            },
            "rule": {"kind": self.rule.kind, "eta": self.rule.eta,
                     "certificate": self.rule.certificate},
            "c": self.c,
            "max_iter": self.max_iter,
            "record_every": self.record_every,
            "seed": self.seed,
        }


class _Engine:
    """Per-run iteration engine over a cached response oracle.

    The oracle makes the per-step membership solve cheap: a cached-inverse
    matvec for linear games (an out-of-box root certifies a boundary
    equilibrium, so the candidate is inadmissible without solving further)
    and a warm-started solve otherwise.
    """

    def __init__(self, geom: SublevelGeometry, level: float,
                 solver_cfg: Optional[ResponseSolverConfig] = None):
        self.geom = geom
        self.game = geom.game
        self.objective = geom.objective
        self.level = level
        cfg = solver_cfg if solver_cfg is not None else geom.solver_cfg
        self.oracle = ResponseOracle(self.game, cfg)
        self._xstar = None   # response at the current accepted incentive

    def admit(self, p):
        """Membership of p in the working sublevel set, with its response."""
        x, interior = self.oracle.response(p)
        if not interior:
            return False, x
        return bool(self.objective.gap(x) <= self.level), x

    def bind(self, p):
        """Sync the cached response to incentive p; raises if inadmissible."""
        ok, x = self.admit(p)
        if not ok:
            raise ValueError("incentive lies outside the working sublevel set")
        self._xstar = x
        return x

    def rule_value(self, rule: LearningRule, x, p):
        if rule.kind == "NE":
            return self._xstar
        if rule.kind == "BR":
            q, coupling = self.game.br_structure
            return project_box(-(p + coupling @ x) / q, self.game.space)
        return project_box(x - rule.eta * (self.game.g0(x) + p), self.game.space)

    def step(self, x, p, k, schedule: StepSchedule, rule: LearningRule):
        a_k = schedule.a(k)
        b_k = schedule.b(k)
        f_val = self.rule_value(rule, x, p)
        x_next = x + a_k * (f_val - x)
        p_hat = p + b_k * self.objective.grad_phi(x)
        accepted, x_hat = self.admit(p_hat)
        if accepted:
            self._xstar = x_hat
            return x_next, p_hat, True
        return x_next, p, False


def _check_rule(game: GameModel, rule: LearningRule):
    if rule.kind == "BR" and game.br_structure is None:
        raise ValueError(f"game {game.name!r} does not support the BR rule")
    if rule.kind == "PG" and not 0.0 < rule.eta < _pg_eta_bound(game):
        raise ValueError(
            f"eta={rule.eta} outside the admissible range "
            f"(0, {_pg_eta_bound(game):.6g}) for this game"
        )


def _resolve_level(cfg: TtsaConfig, geom: SublevelGeometry) -> float:
    level = cfg.c if cfg.c is not None else geom.c
    if not 0.0 < level < geom.c_star:
        raise ValueError(f"c={level} must lie strictly between 0 and c*={geom.c_star:.6g}")
    return level


def ttsa_step(state, cfg: TtsaConfig, geom: SublevelGeometry,
              solver_cfg: Optional[ResponseSolverConfig] = None):
    """One strategy-incentive update from state (x, p, k).

    Returns (x', p', indicator_accepted). The strategy update is a convex
    combination so x' stays in the box whenever f maps into it.
    """
    x, p, k = state
    game = geom.game
    x = as_vector(x, dim=game.dim, name="x")
    p = as_vector(p, dim=game.dim, name="p")
    if not game.space.contains(x, margin=0.0):
        raise ValueError("x lies outside the strategy box")
    _check_rule(game, cfg.rule)
    engine = _Engine(geom, _resolve_level(cfg, geom), solver_cfg)
    engine.bind(p)
    x_next, p_next, accepted = engine.step(x, p, int(k), cfg.schedule, cfg.rule)
    if not game.space.contains(x_next, margin=0.0):
        raise AssertionError("strategy update left the box; broken rule output")
    return x_next, p_next, accepted


def run_ttsa(x0, p0, cfg: TtsaConfig, geom: SublevelGeometry,
             solver_cfg: Optional[ResponseSolverConfig] = None):
    """Iterate the two-timescale update for cfg.max_iter steps.

    Returns (record, summary). The record samples every ``record_every``
    steps plus the initial and final states; it also keeps the full
    per-step acceptance array so acceptance fractions over any window stay
    exact. Summary reports final errors and the accepted fraction over the
    last tenth of the run.
    """
    game = geom.game
    x = as_vector(x0, dim=game.dim, name="x0").copy()
    p = as_vector(p0, dim=game.dim, name="p0").copy()
    if not game.space.contains(x, margin=0.0):
        raise ValueError("x0 lies outside the strategy box")
    _check_rule(game, cfg.rule)
    engine = _Engine(geom, _resolve_level(cfg, geom), solver_cfg)
    try:
        engine.bind(p)
    except ValueError:
        raise ValueError("p0 lies outside the working sublevel set") from None

    record = TtsaRecord(dim=game.dim)
    accepts = np.zeros(cfg.max_iter, dtype=bool)
    accepted_mass = 0.0
    grad_phi = geom.objective.grad_phi

    def sample(k, accepted_flag):
        xstar = engine._xstar
        record.append(
            k, x, p,
            tracking=np.linalg.norm(x - xstar),
            incentive=np.linalg.norm(p - geom.p_dagger),
            V=geom.objective.gap(xstar),
            accepted=accepted_flag,
            xi_norm=np.linalg.norm(grad_phi(x) - grad_phi(xstar)),
        )

    sample(0, True)
    for k in range(cfg.max_iter):
        x, p, accepted = engine.step(x, p, k, cfg.schedule, cfg.rule)
        accepts[k] = accepted
        if accepted:
            accepted_mass += cfg.schedule.b(k)
        k1 = k + 1
        if k1 % cfg.record_every == 0 or k1 == cfg.max_iter:
            sample(k1, accepted)
    record.step_accepts = accepts
    record.accepted_mass = accepted_mass

    tail_start = int(math.floor(0.9 * cfg.max_iter))
    summary = {
        "final_tracking_error": record.tracking_errors[-1],
        "final_incentive_error": record.incentive_errors[-1],
        "final_V": record.values[-1],
        "accepted_fraction_last_10pct": record.acceptance_fraction(tail_start),
        "accepted_fraction_full": record.acceptance_fraction(0),
        "accepted_mass": accepted_mass,
        "iterations": cfg.max_iter,
    }
    return record, summary


@dataclass(frozen=True)
class DiagnosticsSummary:
    tail_tracking_mean: float
    tail_incentive_mean: float
    accepted_mass: float
    monotone_tail: bool
    tail_samples: int


def tracking_diagnostics(rec: TtsaRecord) -> DiagnosticsSummary:
    """Tail behavior of a finished run.

    Tail means cover the final quarter of the recorded samples. The
    monotone-tail flag checks whether the tracking-error envelope (per-bin
    maxima over four bins of the last half) is nonincreasing.
    """
    n = len(rec)
    if n == 0:
        raise ValueError("empty record")
    tail = max(1, n // 4)
    tracking = np.asarray(rec.tracking_errors)
    incentive = np.asarray(rec.incentive_errors)
    half = tracking[n // 2:] if n >= 2 else tracking
    bins = np.array_split(half, min(4, len(half)))
    maxima = [float(np.max(b)) for b in bins if len(b)]
    monotone = all(maxima[i + 1] <= maxima[i] * (1.0 + 1e-12) for i in range(len(maxima) - 1))
    mass = rec.accepted_mass if rec.accepted_mass is not None else float("nan")
    return DiagnosticsSummary(
        tail_tracking_mean=float(np.mean(tracking[-tail:])),
        tail_incentive_mean=float(np.mean(incentive[-tail:])),
        accepted_mass=mass,
        monotone_tail=bool(monotone),
        tail_samples=tail,
    )
