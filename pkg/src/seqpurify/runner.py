"""Benign -> attack -> defense experiment loop and its CSV/manifest outputs."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .attack import AttackedProfile, AttackSpec, greedy_attack, random_attack
from .baselines import baseline_rd, baseline_rde
from .config import ExperimentConfig
from .data import (
    EVALUATION_SET,
    EvaluationPair,
    InteractionDataset,
    build_catalog,
    holdout_last,
    read_interactions,
)
from .ensemble import EnsembleConfig, ReturnDefense
from .graph import MultiHopGraph, build_graph, dumps_graph, load_graph, save_graph
from .metrics import RankingScores, attack_degradation, defense_gain, raw_defense_ratio
from .quality import inject_noise, thin_out
from .recsys import Recommender, RemoteRecommender, train_reference
from .seeding import BASELINE, user_rng

log = logging.getLogger(__name__)

CSV_HEADER = ["condition", "method", "k", "hit", "ndcg", "a_hit", "a_ndcg", "d_hit", "d_ndcg"]

PURIFIER_VARIANTS = {
    "return": "return",
    "return_rop": "rop",
    "return_rr": "rr",
    "return_no_ens": "no_ens",
}


class RunError(RuntimeError):
    def __init__(self, message: str, user: int | None = None, phase: str | None = None):
        where = []
        if user is not None:
            where.append(f"user {user}")
        if phase is not None:
            where.append(f"phase {phase}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.user = user
        self.phase = phase


@dataclass
class UserOutcome:
    user: int
    target: int
    benign: list[int]
    attacked: list[int]
    attacked_profile: AttackedProfile
    defended: dict[str, list[int]] = field(default_factory=dict)
    benign_defended: dict[str, list[int]] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    outcomes: list[UserOutcome]
    graph_sha256: str
    skipped: int = 0
    phases: dict[str, float] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)

    def scores(self, condition: str, method: str = "none") -> RankingScores:
        targets = [o.target for o in self.outcomes]
        if condition == "benign":
            lists = [o.benign for o in self.outcomes]
        elif condition == "attacked":
            lists = [o.attacked for o in self.outcomes]
        elif condition == "defended":
            lists = [o.defended[method] for o in self.outcomes]
        elif condition == "benign_defended":
            lists = [o.benign_defended[method] for o in self.outcomes]
        else:
            raise KeyError(condition)
        return RankingScores.evaluate(lists, targets, self.config.k_list)

    def attack_degradation(self, k: int, metric: str = "hit") -> float | None:
        b = getattr(self.scores("benign"), metric)[k]
        a = getattr(self.scores("attacked"), metric)[k]
        return attack_degradation(b, a)

    def defense_gain(self, method: str, k: int, metric: str = "hit") -> float | None:
        b = getattr(self.scores("benign"), metric)[k]
        a = getattr(self.scores("attacked"), metric)[k]
        d = getattr(self.scores("defended", method), metric)[k]
        return defense_gain(attack_degradation(b, a), attack_degradation(b, d))

    def rows(self) -> list[list]:
        ks = self.config.k_list
        benign = self.scores("benign")
        attacked = self.scores("attacked")
        rows = []
        for k in ks:
            rows.append(["benign", "none", k, benign.hit[k], benign.ndcg[k], None, None, None, None])
            ah = attack_degradation(benign.hit[k], attacked.hit[k])
            an = attack_degradation(benign.ndcg[k], attacked.ndcg[k])
            rows.append(["attacked", "none", k, attacked.hit[k], attacked.ndcg[k], ah, an, None, None])
            for method in self.config.defenses:
                s = self.scores("defended", method)
                dh = attack_degradation(benign.hit[k], s.hit[k])
                dn = attack_degradation(benign.ndcg[k], s.ndcg[k])
                rows.append(
                    ["defended", method, k, s.hit[k], s.ndcg[k], dh, dn,
                     defense_gain(ah, dh), defense_gain(an, dn)]
                )
                if self.config.benign_defense:
                    s = self.scores("benign_defended", method)
                    rows.append(
                        ["benign_defended", method, k, s.hit[k], s.ndcg[k],
                         attack_degradation(benign.hit[k], s.hit[k]),
                         attack_degradation(benign.ndcg[k], s.ndcg[k]), None, None]
                    )
        rows.sort(key=lambda r: (r[0], r[1], r[2]))
        return rows

    def debug_ratios(self) -> dict[str, dict[int, float | None]]:
        """Defense ratio in its raw ``defended / undefended - 1`` form."""
        out = {}
        for method in self.config.defenses:
            out[method] = {}
            for k in self.config.k_list:
                b = self.scores("benign").hit[k]
                a = attack_degradation(b, self.scores("attacked").hit[k])
                d = attack_degradation(b, self.scores("defended", method).hit[k])
                out[method][k] = raw_defense_ratio(a, d)
        return out

    def csv_text(self) -> str:
        return format_report(self.rows())

    def manifest(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "graph_sha256": self.graph_sha256,
            "versions": {
                "seqpurify": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
            },
            "n_users": len(self.outcomes),
            "skipped_users": self.skipped,
            "flags": self.flags,
            "wall_clock_s": {k: round(v, 4) for k, v in self.phases.items()},
        }


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def format_report(rows: Sequence[Sequence]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return out.getvalue()


def prepare_defense_db(
    cfg: ExperimentConfig, db: InteractionDataset, n_items: int
) -> InteractionDataset:
    if cfg.db_inject_fraction is not None:
        return inject_noise(db, cfg.db_inject_fraction, cfg.attack_delta, n_items, cfg.seed)
    if cfg.db_delete_fraction is not None:
        return thin_out(db, cfg.db_delete_fraction, cfg.seed)
    return db


def split_halves(db: InteractionDataset) -> tuple[InteractionDataset, InteractionDataset]:
    users = db.users()
    victim = {u: db[u] for u in users[0::2]}
    defense = {u: db[u] for u in users[1::2]}
    return InteractionDataset(victim, db.role), InteractionDataset(defense, db.role)


class Experiment:
    """One attack/defense evaluation over in-memory data.

    ``external`` builds the graphs (victim and defense); ``pairs`` are the
    evaluation users. Defenses only ever see the attacked item sequence and
    the user id.
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        external: InteractionDataset,
        pairs: Sequence[EvaluationPair],
        n_items: int | None = None,
        defense_graph: MultiHopGraph | None = None,
        victim: Recommender | None = None,
        skipped: int = 0,
    ):
        self.cfg = cfg
        self.pairs = list(pairs)[: cfg.max_users] if cfg.max_users else list(pairs)
        self.skipped = skipped
        if n_items is None:
            n_items = max(
                len(build_catalog(external)),
                max((max(p.profile + (p.target,)) + 1 for p in self.pairs), default=1),
            )
        self.n_items = n_items
        self.phases: dict[str, float] = {}

        t0 = time.perf_counter()
        victim_db, defense_db = (
            split_halves(external) if cfg.disjoint_graphs else (external, external)
        )
        defense_db = prepare_defense_db(cfg, defense_db, n_items)
        if defense_graph is None:
            defense_graph = build_graph(defense_db, cfg.max_hop, n_items=n_items)
        self.graph = defense_graph
        if victim is None:
            if cfg.recommender == "remote":
                victim = RemoteRecommender(
                    cfg.endpoint, n_items, cfg.remote_timeout, cfg.remote_max_in_flight
                )
            elif victim_db is defense_db:
                victim = train_reference(victim_db, graph=defense_graph)
            else:
                g = build_graph(victim_db, cfg.max_hop, n_items=n_items)
                victim = train_reference(victim_db, graph=g)
        self.victim = victim
        self.phases["graphs"] = time.perf_counter() - t0

        self.k = max(cfg.k_list)
        self.attack_spec = AttackSpec(
            cfg.attack_delta, cfg.attack_kind, cfg.attack_budget, cfg.seed
        )
        self.defenses = self._build_defenses()

    def _build_defenses(self) -> dict[str, Callable[[Sequence[int], int], list[int]]]:
        cfg, victim, k = self.cfg, self.victim, self.k
        out = {}
        for method in cfg.defenses:
            if method in PURIFIER_VARIANTS:
                ens = EnsembleConfig(
                    m=cfg.m,
                    count_mean=cfg.count_mean,
                    count_spread=cfg.count_spread,
                    k=k,
                    variant=PURIFIER_VARIANTS[method],
                    seed=cfg.seed,
                    vote=cfg.vote,
                    min_count=cfg.min_count,
                )
                defense = ReturnDefense(self.graph, ens)
                out[method] = lambda p, u, d=defense: d.recommend(victim, p, u)
            elif method == "rd":

                def rd(p, u):
                    rng = user_rng(cfg.seed, u, BASELINE)
                    purified = baseline_rd(p, min(cfg.rd_count, len(p)), rng)
                    return victim.recommend(purified.items, k, user_id=u)

                out[method] = rd
            elif method == "rde":

                def rde(p, u):
                    rng = user_rng(cfg.seed, u, BASELINE)
                    return baseline_rde(
                        victim, p, cfg.m, min(cfg.rd_count, len(p)), rng, k, u, cfg.vote
                    )

                out[method] = rde
        return out

    def attack(self, pair: EvaluationPair) -> AttackedProfile:
        if self.attack_spec.kind == "greedy":
            return greedy_attack(
                pair.profile, self.attack_spec, self.victim, pair.target,
                self.n_items, self.k, pair.user,
            )
        return random_attack(pair.profile, self.attack_spec, self.n_items, pair.user)

    def evaluate_user(self, pair: EvaluationPair) -> UserOutcome:
        user = pair.user
        timings: dict[str, float] = {}
        phase = "benign"
        try:
            t = time.perf_counter()
            benign = self.victim.recommend(pair.profile, self.k, user_id=user)
            timings["benign"] = time.perf_counter() - t

            phase = "attack"
            t = time.perf_counter()
            attacked_profile = self.attack(pair)
            attacked = self.victim.recommend(attacked_profile.items, self.k, user_id=user)
            timings["attack"] = time.perf_counter() - t

            out = UserOutcome(user, pair.target, benign, attacked, attacked_profile)
            phase = "defense"
            t = time.perf_counter()
            for method, defend in self.defenses.items():
                out.defended[method] = defend(attacked_profile.items, user)
                if self.cfg.benign_defense:
                    out.benign_defended[method] = defend(pair.profile, user)
            timings["defense"] = time.perf_counter() - t
        except Exception as e:
            raise RunError(str(e), user, phase) from e
        out.timings = timings
        return out

    def run(self) -> ExperimentResult:
        workers = max(1, min(self.cfg.workers, getattr(self.victim, "max_in_flight", 1)))
        t0 = time.perf_counter()
        if workers == 1:
            outcomes = [self.evaluate_user(p) for p in self.pairs]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(self.evaluate_user, self.pairs))
        phases = dict(self.phases)
        phases["users"] = time.perf_counter() - t0
        for o in outcomes:
            for name, dt in o.timings.items():
                phases[f"user_{name}"] = phases.get(f"user_{name}", 0.0) + dt
        result = ExperimentResult(
            self.cfg,
            outcomes,
            hashlib.sha256(dumps_graph(self.graph).encode("utf-8")).hexdigest(),
            self.skipped,
            phases,
        )
        k0 = self.cfg.k_list[0]
        vacuous = bool(outcomes) and (
            result.scores("attacked").hit[k0] >= result.scores("benign").hit[k0]
        )
        result.flags["vacuous_attack"] = vacuous
        if vacuous:
            log.warning("attack did not lower H@%d; the defense comparison is vacuous", k0)
        return result


def load_inputs(cfg: ExperimentConfig):
    """Read the files named in ``cfg``.

    Returns ``(external, holdout, n_items)``. Without a separate eval file
    the database is split leave-one-out and its profiles (targets removed)
    serve as the external database.
    """
    cfg.check_paths()
    db = read_interactions(cfg.database)
    n_items = len(build_catalog(db))
    if cfg.eval:
        eval_db = read_interactions(cfg.eval, EVALUATION_SET)
        holdout = holdout_last(eval_db)
        n_items = max(n_items, len(build_catalog(eval_db)))
        external = db
    else:
        holdout = holdout_last(db)
        external = holdout.profiles()
    return external, holdout, n_items


def build_defense_graph(cfg: ExperimentConfig) -> MultiHopGraph:
    external, _, n_items = load_inputs(cfg)
    if cfg.disjoint_graphs:
        external = split_halves(external)[1]
    external = prepare_defense_db(cfg, external, n_items)
    return build_graph(external, cfg.max_hop, n_items=n_items)


def load_experiment(cfg: ExperimentConfig) -> Experiment:
    """Resolve files named in ``cfg`` into an :class:`Experiment`."""
    external, holdout, n_items = load_inputs(cfg)
    graph = None
    if cfg.graph_cache and _exists(cfg.graph_cache):
        graph = load_graph(cfg.graph_cache)
        if graph.n_items < n_items:
            raise RunError(
                f"cached graph covers {graph.n_items} items but the data needs {n_items}"
            )
        n_items = graph.n_items
    exp = Experiment(cfg, external, holdout.pairs, n_items, graph, skipped=holdout.skipped)
    if cfg.graph_cache and graph is None:
        save_graph(exp.graph, cfg.graph_cache)
    return exp


def _exists(path: str) -> bool:
    try:
        with open(path, "rb"):
            return True
    except OSError:
        return False


def write_outputs(result: ExperimentResult) -> tuple[str, str]:
    cfg = result.config
    with open(cfg.report, "w", encoding="utf-8", newline="") as fh:
        fh.write(result.csv_text())
    manifest_path = cfg.manifest or cfg.report + ".manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(result.manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return cfg.report, manifest_path
