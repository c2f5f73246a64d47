"""Configuration models for the evolving-graph engine using Pydantic."""

from typing import List, Literal, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


MASK_WORD_BITS = 64
THREADS_ENV_VAR = "EVOGRAPH_THREADS"


class GeneratorConfig(BaseModel):
    """Settings for synthetic evolution traces."""
    model_config = ConfigDict(extra='allow')

    weight_min: int = Field(1, ge=1)
    weight_max: int = Field(10, ge=1)
    allow_self_loops: bool = False
    # Re-adding a previously deleted pair brings back its first weight
    restore_weight_on_readd: bool = True

    @model_validator(mode='after')
    def _check_weight_range(self) -> 'GeneratorConfig':
        if self.weight_max < self.weight_min:
            raise ValueError(
                f"weight_max ({self.weight_max}) must be >= weight_min ({self.weight_min})"
            )
        return self


class EngineConfig(BaseModel):
    """Engine-wide switches shared by all query modes."""
    model_config = ConfigDict(extra='allow')

    mask_capacity: int = Field(64, ge=MASK_WORD_BITS)
    threads: Optional[int] = Field(None, ge=1)
    union_from_scratch: bool = False
    value_layout: str = Field("snapshot_major", pattern="^(snapshot_major|vertex_major)$")
    seed_with_unreduced_batches: bool = False
    generator: GeneratorConfig = Field(default_factory=GeneratorConfig)

    @field_validator('mask_capacity')
    @classmethod
    def _whole_words(cls, value: int) -> int:
        if value % MASK_WORD_BITS != 0:
            raise ValueError(f"mask_capacity must be a multiple of {MASK_WORD_BITS}, got {value}")
        return value


class EngineTemplate(BaseModel):
    """Named, versioned engine configuration stored under templates/."""
    model_config = ConfigDict(extra='allow')

    template_name: str
    version: str
    engine: EngineConfig = Field(default_factory=EngineConfig)
    info: Optional[str] = None


class Manifest(BaseModel):
    """Describes one evolving-graph dataset on disk.

    Either ``base`` plus ordered ``deltas`` (one file per transition) or
    ``snapshots`` (one complete edge list per snapshot) must be given.
    Paths are relative to the manifest file.
    """
    model_config = ConfigDict(extra='allow')

    num_vertices: int = Field(..., ge=0)
    base: Optional[str] = None
    deltas: List[str] = Field(default_factory=list)
    snapshots: Optional[List[str]] = None
    remap_ids: bool = False
    format: Literal["base+deltas", "snapshots"] = "base+deltas"
    info: Optional[str] = None

    @model_validator(mode='after')
    def _check_layout(self) -> 'Manifest':
        if self.snapshots is not None:
            if self.base is not None or self.deltas:
                raise ValueError("use either 'snapshots' or 'base'/'deltas', not both")
            if not self.snapshots:
                raise ValueError("'snapshots' must list at least one edge list")
            self.format = "snapshots"
        elif self.base is None:
            raise ValueError("'base' is required unless 'snapshots' is given")
        return self
