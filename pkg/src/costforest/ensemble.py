"""The full ensemble: induce subsamples, train base trees, combine.

Training follows one recipe for every inducer/combiner pairing: draw the T
subsamples, grow a cost-sensitive tree on each, score each tree's savings on
its out-of-bag rows, then fit the chosen combiner. Out-of-bag savings are
recorded even when the combiner ignores them, so reports can always show
per-tree quality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import combiners, csdt
from .combiners import GaConfig, StackingWeights, WeightVector
from .cost_model import CostedDataset, savings
from .csdt import CsdtConfig, CsdtModel
from .errors import ConfigError, ValidationError
from .inducers import BaseSample, InducerConfig, draw_samples
from .rng import STREAM_NODES, STREAM_SAMPLES, make_rng

FORMAT_VERSION = "1"


@dataclass(frozen=True)
class EcsdtConfig:
    inducer: InducerConfig = field(default_factory=InducerConfig)
    tree: CsdtConfig = field(default_factory=CsdtConfig)
    combiner: str = "wv"
    ga: GaConfig = field(default_factory=GaConfig)

    def validate(self) -> None:
        self.inducer.validate()
        self.tree.validate()
        if self.combiner not in combiners.COMBINER_KINDS:
            raise ConfigError(
                f"combiner must be one of {combiners.COMBINER_KINDS}, got {self.combiner!r}"
            )
        if self.combiner == "stacking":
            self.ga.validate()


@dataclass
class EnsembleModel:
    """T base trees plus exactly one populated combiner parameter set."""

    base_models: list[CsdtModel]
    feature_subsets: list[np.ndarray | None]
    oob_savings: np.ndarray
    combiner: str
    config: EcsdtConfig
    k: int
    weights: WeightVector | None = None
    stacking: StackingWeights | None = None

    @property
    def T(self) -> int:
        return len(self.base_models)

    def base_votes(self, X: np.ndarray) -> np.ndarray:
        """(T, N) matrix of base-tree predictions, feature subsets remapped."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.k:
            raise ValidationError(f"X has shape {X.shape}, expected (n, {self.k})")
        votes = np.empty((self.T, X.shape[0]), dtype=np.int64)
        for j, (model, subset) in enumerate(zip(self.base_models, self.feature_subsets)):
            view = X if subset is None else X[:, subset]
            votes[j] = model.predict_many(view)
        return votes

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        votes = self.base_votes(X)
        if self.combiner == "mv":
            return combiners.majority_vote(votes)
        if self.combiner in ("wv", "wv-acc"):
            return combiners.weighted_vote(votes, self.weights)
        return combiners.stacking_predict(votes, self.stacking)


def _train_one(
    train_set: CostedDataset, sample: BaseSample, config: EcsdtConfig, j: int
) -> tuple[CsdtModel, np.ndarray | None]:
    rows = sample.example_indices
    if sample.feature_indices is not None:
        sub = CostedDataset(
            train_set.X[np.ix_(rows, sample.feature_indices)],
            train_set.y[rows],
            train_set.costs[rows],
            strict=train_set.strict,
            validate=False,
        )
        model = csdt.grow(sub, config.tree)
        return model, sample.feature_indices
    sub = train_set.subset(rows)
    if sample.node_features is not None:
        rng = make_rng(config.inducer.seed, STREAM_NODES, j)
        model = csdt.grow(sub, config.tree, rng=rng, node_features=sample.node_features)
    else:
        model = csdt.grow(sub, config.tree)
    return model, None


def _oob_savings(
    train_set: CostedDataset,
    model: CsdtModel,
    subset: np.ndarray | None,
    oob_rows: np.ndarray,
) -> float:
    oob = train_set.subset(oob_rows)
    view = oob.X if subset is None else oob.X[:, subset]
    try:
        return savings(oob, model.predict_many(view))
    except ValidationError:
        # costless-class cost of this OOB draw is zero: no savings to measure,
        # record a neutral zero so the tree earns no voting weight from it
        return 0.0


def train(train_set: CostedDataset, config: EcsdtConfig | None = None) -> EnsembleModel:
    """Run the ensemble training recipe end to end, deterministically per seed."""
    config = config or EcsdtConfig()
    config.validate()
    samples = draw_samples(train_set.n, train_set.k, config.inducer)
    base_models: list[CsdtModel] = []
    subsets: list[np.ndarray | None] = []
    oob_savings = np.empty(len(samples))
    for j, sample in enumerate(samples):
        if sample.oob_indices.size == 0:
            # one re-draw on a fresh substream, then give up
            redraw = make_rng(config.inducer.seed, STREAM_SAMPLES, j, 1)
            rows = np.sort(redraw.integers(0, train_set.n, size=sample.example_indices.size))
            mask = np.ones(train_set.n, dtype=bool)
            mask[rows] = False
            sample = BaseSample(rows, np.flatnonzero(mask), sample.feature_indices,
                                sample.node_features)
            if sample.oob_indices.size == 0:
                raise ValidationError(
                    f"base sample {j} covers every row twice in a row; "
                    "reduce n_examples"
                )
        model, subset = _train_one(train_set, sample, config, j)
        base_models.append(model)
        subsets.append(subset)
        oob_savings[j] = _oob_savings(train_set, model, subset, sample.oob_indices)

    ensemble = EnsembleModel(
        base_models=base_models,
        feature_subsets=subsets,
        oob_savings=oob_savings,
        combiner=config.combiner,
        config=config,
        k=train_set.k,
    )
    if config.combiner == "wv":
        ensemble.weights = combiners.weights_from_savings(oob_savings)
    elif config.combiner == "wv-acc":
        errors = []
        for model, subset, sample in zip(base_models, subsets, samples):
            oob = train_set.subset(sample.oob_indices)
            view = oob.X if subset is None else oob.X[:, subset]
            errors.append(float((model.predict_many(view) != oob.y).mean()))
        raw = 1.0 - np.asarray(errors)
        total = raw.sum()
        ensemble.weights = (
            WeightVector(raw / total) if total > 0
            else WeightVector(np.full(raw.size, 1.0 / raw.size))
        )
    elif config.combiner == "stacking":
        # second level trains on in-sample base votes over the full training set
        votes = ensemble.base_votes(train_set.X)
        ensemble.stacking = combiners.fit_stacking(train_set, votes, config.ga)
    return ensemble


def predict(model: EnsembleModel, data: CostedDataset | np.ndarray) -> np.ndarray:
    X = data.X if isinstance(data, CostedDataset) else np.asarray(data, dtype=np.float64)
    return model.predict_many(X)


# --- serialization ---------------------------------------------------------


def _config_to_dict(config: EcsdtConfig) -> dict:
    return {
        "inducer": {
            "kind": config.inducer.kind,
            "T": config.inducer.T,
            "n_examples": config.inducer.n_examples,
            "n_features": config.inducer.n_features,
            "seed": config.inducer.seed,
        },
        "tree": csdt.config_to_dict(config.tree),
        "combiner": config.combiner,
        "ga": {
            "population": config.ga.population,
            "generations": config.ga.generations,
            "crossover_rate": config.ga.crossover_rate,
            "mutation_rate": config.ga.mutation_rate,
            "mutation_sigma": config.ga.mutation_sigma,
            "beta_bounds": list(config.ga.beta_bounds),
            "elitism": config.ga.elitism,
            "tournament": config.ga.tournament,
            "seed": config.ga.seed,
        },
    }


def _config_from_dict(data: dict) -> EcsdtConfig:
    ga = dict(data["ga"])
    ga["beta_bounds"] = tuple(ga["beta_bounds"])
    return EcsdtConfig(
        inducer=InducerConfig(**data["inducer"]),
        tree=CsdtConfig(**data["tree"]),
        combiner=data["combiner"],
        ga=GaConfig(**ga),
    )


def model_to_dict(model: EnsembleModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "ecsdt",
        "k": model.k,
        "combiner": model.combiner,
        "config": _config_to_dict(model.config),
        "oob_savings": model.oob_savings.tolist(),
        "feature_subsets": [
            None if s is None else [int(i) for i in s] for s in model.feature_subsets
        ],
        "base_models": [csdt.model_to_dict(m) for m in model.base_models],
        "weights": None if model.weights is None else model.weights.alphas.tolist(),
        "stacking": None if model.stacking is None else {
            "betas": model.stacking.betas.tolist(),
            "intercept": model.stacking.intercept,
            "threshold": model.stacking.threshold,
        },
    }


def model_from_dict(data: dict) -> EnsembleModel:
    if data.get("format_version") != FORMAT_VERSION:
        raise ValidationError(
            f"unsupported model format version {data.get('format_version')!r}"
        )
    if data.get("kind") != "ecsdt":
        raise ValidationError(f"not an ensemble model file: kind={data.get('kind')!r}")
    weights = data.get("weights")
    stacking = data.get("stacking")
    return EnsembleModel(
        base_models=[csdt.model_from_dict(d) for d in data["base_models"]],
        feature_subsets=[
            None if s is None else np.asarray(s, dtype=np.int64)
            for s in data["feature_subsets"]
        ],
        oob_savings=np.asarray(data["oob_savings"], dtype=np.float64),
        combiner=data["combiner"],
        config=_config_from_dict(data["config"]),
        k=int(data["k"]),
        weights=None if weights is None else WeightVector(np.asarray(weights)),
        stacking=None if stacking is None else StackingWeights(
            betas=np.asarray(stacking["betas"]),
            intercept=float(stacking["intercept"]),
            threshold=float(stacking["threshold"]),
        ),
    )


def save(model: EnsembleModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), indent=1, sort_keys=True), encoding="utf-8"
    )


def load(path: str | Path) -> EnsembleModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
