"""Fine-tuning recipes for the three training stages, as machine-readable configs.

Only the configuration is provided; nothing here trains a model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from swarakit.errors import UnknownStage

STAGES = ("accent", "hindi", "emotion")


@dataclass(frozen=True)
class RecipeConfig:
    stage: str
    optimizer: str
    learning_rate: float
    batch_size: int
    grad_accum: int = 1
    steps: int | None = None
    epochs: int | None = None
    warmup_steps: int = 0
    clip_norm: float | None = None
    scheduler: str | None = None
    loss_terms: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.grad_accum < 1:
            raise ValueError("batch_size and grad_accum must be >= 1")
        if (self.steps is None) == (self.epochs is None):
            raise ValueError("exactly one of steps / epochs must be set")

    def to_json(self) -> dict:
        doc = {
            "stage": self.stage,
            "optimizer": self.optimizer,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "grad_accum": self.grad_accum,
            "steps": self.steps,
            "epochs": self.epochs,
            "warmup_steps": self.warmup_steps,
            "clip_norm": self.clip_norm,
            "scheduler": self.scheduler,
            "loss_terms": list(self.loss_terms),
        }
        doc.update(self.extra)
        return doc


_RECIPES = {
    "accent": RecipeConfig(
        stage="accent",
        optimizer="AdamW",
        learning_rate=1e-4,
        batch_size=32,
        steps=100000,
        clip_norm=1.0,
        scheduler="linear-decay-to-zero",
        loss_terms=("mel_reconstruction", "duration", "pitch"),
        extra={"eval_every_steps": 1000, "checkpoint_selection": "min_validation_loss"},
    ),
    "hindi": RecipeConfig(
        stage="hindi",
        optimizer="Adam",
        learning_rate=5e-5,
        batch_size=32,
        epochs=2,
        loss_terms=("cross_entropy",),
        extra={"init_from": "accent"},
    ),
    "emotion": RecipeConfig(
        stage="emotion",
        optimizer="Adam",
        learning_rate=8e-5,
        batch_size=1,
        grad_accum=18,
        epochs=10,
        warmup_steps=50,
        scheduler="constant-with-warmup",
        loss_terms=("cross_entropy",),
        extra={
            "init_from": "parler-tts-mini-v1",
            "feature_extractor": "dac_44khZ_8kbps",
            "dataset": "processed_english_emotions",
            "reference_final_loss": 3.27,
        },
    ),
}


def recipe(stage: str) -> RecipeConfig:
    try:
        return _RECIPES[stage]
    except KeyError:
        raise UnknownStage(f"unknown stage {stage!r}; expected one of {', '.join(STAGES)}") from None


def recipe_json(stage: str) -> str:
    return json.dumps(recipe(stage).to_json(), indent=2) + "\n"
