"""
Configuration models for corpora, networks and training runs.
Uses Pydantic for validation and type safety.
"""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Class proportions of the four-emotion benchmark (neutral, happiness, sadness, anger).
IEMOCAP_PROPORTIONS = (1708, 1636, 1084, 1103)


class SynthConfig(BaseModel):
    """
    Settings for the synthetic multimodal corpus generator.
    """
    model_config = ConfigDict(extra="forbid")

    classes: int = Field(4, ge=2)
    samples_per_class: int = Field(400, ge=1)
    rho: float = Field(0.3, description="fraction of samples whose text comes from another class")
    sigma: float = Field(0.5, description="additive Gaussian noise scale")
    seed: int = 0
    class_counts: Optional[List[int]] = None
    proportions: Optional[Literal["iemocap"]] = None
    min_text_length: int = Field(8, ge=1, le=30)

    @field_validator('rho')
    @classmethod
    def rho_in_unit_interval(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {v}")
        return v

    @field_validator('sigma')
    @classmethod
    def sigma_non_negative(cls, v: float) -> float:
        if v < 0.0:
            raise ValueError(f"sigma must be non-negative, got {v}")
        return v

    @model_validator(mode='after')
    def counts_match_classes(self) -> 'SynthConfig':
        if self.class_counts is not None:
            if len(self.class_counts) != self.classes:
                raise ValueError("class_counts needs one entry per class")
            if any(c < 1 for c in self.class_counts):
                raise ValueError("every class needs at least one sample")
        if self.proportions == "iemocap" and self.classes != len(IEMOCAP_PROPORTIONS):
            raise ValueError("iemocap proportions are defined for 4 classes")
        return self

    def counts(self) -> List[int]:
        """Per-class sample counts after overrides."""
        if self.class_counts is not None:
            return list(self.class_counts)
        if self.proportions == "iemocap":
            total = self.samples_per_class * self.classes
            weight = sum(IEMOCAP_PROPORTIONS)
            counts = [int(round(total * p / weight)) for p in IEMOCAP_PROPORTIONS]
            return [max(1, c) for c in counts]
        return [self.samples_per_class] * self.classes


class AudioEncoderConfig(BaseModel):
    """Spectrogram CNN: ``layers`` × (3×3 conv → ReLU → 2×2 max-pool)."""
    model_config = ConfigDict(extra="forbid")

    layers: int = Field(4, ge=1)
    channels: int = Field(8, ge=1)
    input_size: int = Field(128, ge=2)

    @model_validator(mode='after')
    def pooling_divides_input(self) -> 'AudioEncoderConfig':
        if self.input_size % (2 ** self.layers):
            raise ValueError(
                f"input_size {self.input_size} is not divisible by 2^{self.layers}"
            )
        return self

    @property
    def embedding_dim(self) -> int:
        side = self.input_size // (2 ** self.layers)
        return self.channels * side * side


class TextEncoderConfig(BaseModel):
    """Stacked unidirectional LSTM with additive attention pooling."""
    model_config = ConfigDict(extra="forbid")

    num_layers: int = Field(2, ge=1)
    input_size: int = Field(300, ge=1)
    hidden_size: int = Field(200, ge=1)
    seq_len: int = Field(30, ge=1)
    attention_size: int = Field(128, ge=1)
    forget_bias: float = 1.0

    @property
    def embedding_dim(self) -> int:
        return self.hidden_size


class ModelConfig(BaseModel):
    """Full fusion network: two encoders, linear classifier, discriminator."""
    model_config = ConfigDict(extra="forbid")

    num_classes: int = Field(4, ge=2)
    audio: AudioEncoderConfig = Field(default_factory=AudioEncoderConfig)
    text: TextEncoderConfig = Field(default_factory=TextEncoderConfig)
    discriminator_hidden: int = Field(128, ge=1)

    @property
    def fused_dim(self) -> int:
        return self.audio.embedding_dim + self.text.embedding_dim


def desk_model_config(num_classes: int = 4) -> ModelConfig:
    """Reduced network for multi-seed comparisons on a single CPU."""
    return ModelConfig(
        num_classes=num_classes,
        audio=AudioEncoderConfig(layers=2, channels=4, input_size=16),
        text=TextEncoderConfig(num_layers=1, input_size=16, hidden_size=16, seq_len=10, attention_size=16),
        discriminator_hidden=32,
    )


# Run defaults a preset swaps in below config-file values and flags.
PRESETS: Dict[str, Dict[str, Any]] = {
    "desk": {"epochs": 10, "batch_size": 32, "learning_rate": 0.003},
}


class TrainConfig(BaseModel):
    """
    Optimizer and loop settings for one training run.
    """
    model_config = ConfigDict(extra="forbid")

    learning_rate: float = Field(0.001, gt=0)
    batch_size: int = Field(64, ge=1)
    alpha: float = 0.1
    epochs: int = Field(30, ge=1)
    seed: int = 0
    adam_beta1: float = Field(0.9, ge=0, lt=1)
    adam_beta2: float = Field(0.999, ge=0, lt=1)
    adam_eps: float = Field(1e-8, gt=0)
    use_discriminator: bool = True
    eval_batch_size: int = Field(128, ge=1)

    @field_validator('alpha')
    @classmethod
    def alpha_in_unit_interval(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {v}")
        return v

    @model_validator(mode='after')
    def baseline_has_no_regularizer(self) -> 'TrainConfig':
        if not self.use_discriminator and self.alpha != 0.0:
            raise ValueError("a run without discriminator must use alpha = 0")
        return self


class RunConfig(BaseModel):
    """
    Everything a CLI command can be configured with.

    Keys mirror the command-line flags one to one; unknown keys are
    rejected so typos in config files surface before any compute.
    """
    model_config = ConfigDict(extra="forbid")

    # paths
    data: Optional[str] = None
    out: Optional[str] = None
    checkpoint: Optional[str] = None
    wav_dir: Optional[str] = None
    manifest: Optional[str] = None

    # corpus generation
    classes: int = 4
    per_class: int = 400
    rho: float = 0.3
    sigma: float = 0.5
    proportions: Optional[Literal["iemocap"]] = None
    preset: Optional[Literal["desk"]] = None

    # training
    alpha: float = 0.1
    epochs: int = 30
    learning_rate: float = 0.001
    batch_size: int = 64
    seed: int = 0
    baseline: bool = False

    # protocol
    folds: int = 10
    fold: Optional[int] = None
    grid_step: float = 0.1
    grid_folds: int = 3
    alphas: List[float] = Field(default_factory=lambda: [0.0, 0.1])
    seeds: int = 5
    threads: Optional[int] = None

    # gradient checking
    h: float = 1e-5
    tol: float = 1e-4
    max_coords: Optional[int] = None
    cases: List[str] = Field(default_factory=list)

    @field_validator('fold')
    @classmethod
    def fold_non_negative(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 0:
            raise ValueError("fold index must be non-negative")
        return v

    @field_validator('grid_step')
    @classmethod
    def step_in_range(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError("grid_step must lie in (0, 1]")
        return v

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            classes=self.classes,
            samples_per_class=self.per_class,
            rho=self.rho,
            sigma=self.sigma,
            seed=self.seed,
            proportions=self.proportions,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            alpha=0.0 if self.baseline else self.alpha,
            epochs=self.epochs,
            seed=self.seed,
            use_discriminator=not self.baseline,
        )

    def network_config(self) -> ModelConfig:
        if self.preset == "desk":
            return desk_model_config(self.classes)
        return ModelConfig(num_classes=self.classes)
