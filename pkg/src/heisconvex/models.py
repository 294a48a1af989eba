"""Request and response schemas shared by the HTTP service and the CLI."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

COMMANDS: dict[str, tuple[str, ...]] = {
    "verify": ("comparison", "boundary-min", "aleksandrov", "geometric", "scaling", "harnack", "convexity"),
    "measure": ("normal-map", "slicing", "diam-hs"),
    "experiment": ("sharpness", "prop-ma"),
    "degree": ("brouwer", "set-valued"),
}

ALL_COMMANDS = tuple(f"{group} {name}" for group, names in COMMANDS.items() for name in names)


class GallerySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "cylinder-bump"
    params: dict[str, float] = Field(default_factory=dict)


class Grids(BaseModel):
    """Resolution knobs. ``None`` lets each command pick its own default."""

    model_config = ConfigDict(extra="forbid")

    cell: Optional[float] = Field(default=None, gt=0)
    slice_samples: Optional[int] = Field(default=None, ge=8)
    base_grid: int = Field(default=5, ge=1, le=64)
    seed: int = Field(default=0, ge=0)
    t_spacing: Optional[float] = Field(default=None, gt=0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: str
    gallery: GallerySpec = Field(default_factory=GallerySpec)
    grids: Grids = Field(default_factory=Grids)
    output_dir: str = "."
    threads: Optional[int] = Field(default=None, ge=1)
    field: Optional[str] = None
    R: Optional[float] = Field(default=None, gt=0)
    options: dict[str, Any] = Field(default_factory=dict)

    @field_validator("command")
    @classmethod
    def _known_command(cls, v: str) -> str:
        v = " ".join(v.split())
        if v not in ALL_COMMANDS:
            raise ValueError(f"unknown command {v!r}; choose from {list(ALL_COMMANDS)}")
        return v

    @property
    def slug(self) -> str:
        return self.command.replace(" ", "-")


class RunResult(BaseModel):
    exit_code: int
    verdict: str
    report: dict[str, Any]
    csv: str
    message: str = ""


class GalleryInfo(BaseModel):
    name: str
    defaults: dict[str, float]

