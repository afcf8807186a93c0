"""The full active-learning procedure for one (config, seed) pair.

Each epoch: train on the labelled pool, refit the gate's conditional
Gaussians from a clean forward pass, and on acquisition epochs (multiples
of the configured period) score the unlabelled pool, take the top slice,
and let the questioning strategy route each pick to the oracle or to a
self-label.  Runs are pure functions of (config, seed): RNG streams for
data, network, strategy draws, and oracle flips are spawned separately so
strategies that consume no randomness leave the shared streams untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .acquisition import (
    PosteriorSamples,
    bald_mcd,
    instance_seed,
    mc_posteriors,
    predictive_entropy,
    select_top_b,
)
from .config import ExperimentConfig, config_hash
from .data import Dataset, gen_synthetic, load_csv, split, standardize
from .errors import ConfigError, UndefinedMetricError
from .gate import GateStats, chernoff_bound, fit_conditional_gaussians
from .metrics import auc_ovr
from .network import Network, train_epoch
from .oracle import Oracle, OracleConfig, build_neighbor_table
from .strategy import QuestionContext, decide


@dataclass
class PoolState:
    """Partition of the training split into labelled and unlabelled ids.

    Assigned labels are the training targets; true labels live only in the
    dataset and are consulted by evaluation and oracle code, never by
    training.
    """

    labelled_ids: list[int]
    assigned_labels: dict[int, int]
    sources: dict[int, str]  # "initial" | "oracle" | "self"
    unlabelled_ids: list[int]  # kept sorted

    @classmethod
    def from_initial(
        cls, train_ids: np.ndarray, init_ids: np.ndarray, true_labels: np.ndarray
    ) -> "PoolState":
        init_set = set(int(i) for i in init_ids)
        labelled = sorted(init_set)
        unlabelled = sorted(int(i) for i in train_ids if int(i) not in init_set)
        return cls(
            labelled_ids=labelled,
            assigned_labels={i: int(true_labels[i]) for i in labelled},
            sources={i: "initial" for i in labelled},
            unlabelled_ids=unlabelled,
        )

    def move_to_labelled(self, instance_id: int, label: int, source: str) -> None:
        self.unlabelled_ids.remove(instance_id)
        self.labelled_ids.append(instance_id)
        self.assigned_labels[instance_id] = int(label)
        self.sources[instance_id] = source

    def training_arrays(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ids = self.labelled_ids
        x = features[ids]
        y = np.asarray([self.assigned_labels[i] for i in ids], dtype=np.int64)
        return x, y


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    gate_loss: float
    val_auc: float
    d_hellinger: float
    chernoff_bound: float  # nan while the gate fit is invalid
    beta_star: float
    cum_ask_rate: float  # 0.0 until the first acquisition
    n_labelled: int
    n_unlabelled: int


@dataclass(frozen=True)
class AcquisitionRecord:
    epoch: int
    acquisition_index: int
    instance_id: int
    source: str  # "oracle" | "self"
    assigned_label: int
    true_label: int  # evaluation-only provenance


@dataclass
class ResultLog:
    seed: int
    config_hash: str
    epochs: list[EpochRecord] = field(default_factory=list)
    acquisitions: list[AcquisitionRecord] = field(default_factory=list)
    test_auc: float = float("nan")
    stratified_split: bool = True  # False marks the unstratified fallback

    @property
    def n_acquired(self) -> int:
        return len(self.acquisitions)

    @property
    def n_oracle(self) -> int:
        return sum(1 for a in self.acquisitions if a.source == "oracle")


def ask_rate(log: ResultLog) -> float:
    """Fraction of acquired instances whose labels came from the oracle."""
    if log.n_acquired == 0:
        raise UndefinedMetricError("no acquisitions occurred")
    return log.n_oracle / log.n_acquired


def _build_dataset(config: ExperimentConfig, seed_seq: np.random.SeedSequence) -> Dataset:
    d = config.dataset
    if d.source == "csv":
        if not d.csv_path:
            raise ConfigError("dataset.csv_path is required when dataset.source = csv")
        return load_csv(d.csv_path, d.label_column)
    return gen_synthetic(d.kind, d.n, d.classes, d.features, d.separation, seed_seq)


def _safe_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    try:
        return auc_ovr(scores, labels)
    except UndefinedMetricError:
        return float("nan")


def _pool_samples(
    net: Network,
    features: np.ndarray,
    ids: list[int],
    n_passes: int,
    seed: int,
    epoch: int,
    cache: dict[int, PosteriorSamples],
) -> None:
    for i in ids:
        if i not in cache:
            cache[i] = mc_posteriors(
                net, features[i], n_passes, instance_seed(seed, epoch, i)
            )


def run_experiment(config: ExperimentConfig, seed: int) -> ResultLog:
    """Run one experiment; deterministic given (config, seed)."""
    root = np.random.SeedSequence(int(seed))
    synth_ss, split_ss, net_ss, decision_ss, oracle_ss = root.spawn(5)

    dataset = _build_dataset(config, synth_ss)
    al = config.active_learning
    parts = split(
        dataset,
        (config.dataset.train_frac, config.dataset.val_frac, config.dataset.test_frac),
        split_ss,
        init_labelled_frac=al.init_labelled_frac,
    )
    features = standardize(dataset.features, parts.train)

    oracle_cfg = OracleConfig(
        kind=config.oracle.kind,
        gamma=config.oracle.gamma,
        embed_dims=min(config.oracle.embed_dims, dataset.n_features),
        seed=int(seed),
    )
    table = None
    if oracle_cfg.kind == "nn-flip":
        train_view = dataset.subset(parts.train)
        table = build_neighbor_table(
            train_view,
            oracle_cfg.embed_dims,
            seed=oracle_cfg.seed,
            instance_ids=parts.train,
        )
    oracle = Oracle(oracle_cfg, dataset.n_classes, table)

    net_rng = np.random.default_rng(net_ss)
    net = Network.initialize(
        n_features=dataset.n_features,
        n_classes=dataset.n_classes,
        hidden=list(config.network.hidden),
        dropout_rate=config.network.dropout,
        seed=net_rng.integers(2**63),
        gate_detached=config.network.gate_detached,
    )
    decision_rng = np.random.default_rng(decision_ss)
    oracle_rng = np.random.default_rng(oracle_ss)

    pool = PoolState.from_initial(parts.train, parts.init_labelled, dataset.labels)
    if not pool.labelled_ids:
        raise ConfigError("initial labelled pool is empty")

    log = ResultLog(
        seed=int(seed),
        config_hash=config_hash(config),
        stratified_split=parts.stratified,
    )
    val_labels = dataset.labels[parts.val]
    acquisition_index = 0

    for epoch in range(1, config.training.epochs + 1):
        x_lab, y_lab = pool.training_arrays(features)
        stats_epoch = train_epoch(
            net,
            x_lab,
            y_lab,
            config.training.learning_rate,
            config.training.batch_size,
            net_rng,
        )

        lab_probs, lab_gate, _ = net.forward_batch(x_lab)
        e_flags = (lab_probs.argmax(axis=1) != y_lab).astype(np.int64)
        gate_stats = fit_conditional_gaussians(lab_gate, e_flags)

        val_probs, _, _ = net.forward_batch(features[parts.val])
        val_auc = _safe_auc(val_probs, val_labels)

        if (
            epoch % al.period == 0
            and al.b_frac > 0.0
            and pool.unlabelled_ids
        ):
            _acquire(
                config,
                seed,
                epoch,
                acquisition_index,
                net,
                features,
                dataset,
                pool,
                gate_stats,
                oracle,
                decision_rng,
                oracle_rng,
                log,
            )
            acquisition_index += 1

        if gate_stats.valid:
            chern = chernoff_bound(gate_stats, config.chernoff_mode)
            bound, beta_star = chern.bound, chern.beta_star
        else:
            bound, beta_star = float("nan"), float("nan")
        cum_rate = log.n_oracle / log.n_acquired if log.n_acquired else 0.0
        log.epochs.append(
            EpochRecord(
                epoch=epoch,
                train_loss=stats_epoch.mean_class_loss,
                gate_loss=stats_epoch.mean_gate_loss,
                val_auc=val_auc,
                d_hellinger=gate_stats.d_hellinger,
                chernoff_bound=bound,
                beta_star=beta_star,
                cum_ask_rate=cum_rate,
                n_labelled=len(pool.labelled_ids),
                n_unlabelled=len(pool.unlabelled_ids),
            )
        )
        if not pool.unlabelled_ids:
            break

    test_probs, _, _ = net.forward_batch(features[parts.test])
    log.test_auc = _safe_auc(test_probs, dataset.labels[parts.test])
    return log


def _acquire(
    config: ExperimentConfig,
    seed: int,
    epoch: int,
    acquisition_index: int,
    net: Network,
    features: np.ndarray,
    dataset: Dataset,
    pool: PoolState,
    gate_stats: GateStats,
    oracle: Oracle,
    decision_rng: np.random.Generator,
    oracle_rng: np.random.Generator,
    log: ResultLog,
) -> None:
    """One acquisition event: score, select, question, transfer."""
    al = config.active_learning
    candidates = list(pool.unlabelled_ids)
    samples: dict[int, PosteriorSamples] = {}

    if al.acquisition == "random":
        epoch_rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(epoch)]))
        scores = epoch_rng.random(len(candidates))
    else:
        _pool_samples(net, features, candidates, al.mc_passes, seed, epoch, samples)
        scorer = bald_mcd if al.acquisition == "bald-mcd" else predictive_entropy
        scores = np.asarray([scorer(samples[i]) for i in candidates])

    picked = [candidates[pos] for pos in select_top_b(scores, al.b_frac)]
    # Strategy draws consume the decision stream in instance-id order.
    picked.sort()
    _pool_samples(net, features, picked, al.mc_passes, seed, epoch, samples)

    _, gate_det, _ = net.forward_batch(features[picked])
    strat = config.strategy
    for row, instance_id in enumerate(picked):
        ctx = QuestionContext(
            acquisition_index=acquisition_index,
            gate_stats=gate_stats,
            gate_output=float(gate_det[row]),
            mc_mean_probs=samples[instance_id].mean_probs,
            hellinger_threshold=strat.hellinger_threshold,
            entropy_threshold=strat.entropy_threshold,
            epsilon0=strat.epsilon0,
            epsilon_decay=strat.epsilon_decay,
        )
        decision = decide(strat.name, ctx, decision_rng)
        true_label = int(dataset.labels[instance_id])
        if decision.ask:
            assigned = oracle.label(instance_id, true_label, oracle_rng)
            source = "oracle"
        else:
            assigned = decision.assigned_label
            source = "self"
        pool.move_to_labelled(instance_id, assigned, source)
        log.acquisitions.append(
            AcquisitionRecord(
                epoch=epoch,
                acquisition_index=acquisition_index,
                instance_id=instance_id,
                source=source,
                assigned_label=int(assigned),
                true_label=true_label,
            )
        )
