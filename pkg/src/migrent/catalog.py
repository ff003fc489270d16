"""CPU catalog: benchmark scores, rated power, and efficiency ratios.

A catalog row describes one CPU model by its throughput benchmark score and
its thermal design power. The ratio score/TDP is the model's computational
efficiency; dividing the on-premise efficiency by the cloud reference's
efficiency gives the energy fraction left after an unchanged move of the
workload onto the cloud hardware.
"""

from __future__ import annotations

import csv
import datetime as dt
import difflib
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

from .errors import CatalogError

CATALOG_COLUMNS = ("model_name", "spec_score", "tdp_watts", "release_date", "cores", "cloud")


@dataclass(frozen=True)
class CpuSpec:
    """One CPU model: benchmark throughput, rated power draw, and metadata."""

    model_name: str
    spec_score: float
    tdp_watts: float
    release_date: dt.date
    cores: int
    cloud: bool = False

    def __post_init__(self):
        if not self.model_name:
            raise CatalogError("model_name must be non-empty")
        if not self.spec_score > 0:
            raise CatalogError(f"{self.model_name}: spec_score must be positive, got {self.spec_score}")
        if not self.tdp_watts > 0:
            raise CatalogError(f"{self.model_name}: tdp_watts must be positive, got {self.tdp_watts}")
        if self.cores < 1:
            raise CatalogError(f"{self.model_name}: cores must be at least 1, got {self.cores}")

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "spec_score": self.spec_score,
            "tdp_watts": self.tdp_watts,
            "release_date": self.release_date.isoformat(),
            "cores": self.cores,
            "cloud": self.cloud,
        }


def compute_ce(spec: CpuSpec) -> float:
    """Computational efficiency: benchmark score per watt of rated power."""
    return spec.spec_score / spec.tdp_watts


def lift_and_shift_fraction(on_prem: CpuSpec, cloud: CpuSpec) -> float:
    """Energy fraction after moving the workload unchanged onto the cloud CPU.

    Below 1.0 the move saves energy; above 1.0 the on-premise part was
    already more efficient than the cloud reference and the move costs
    energy.
    """
    return compute_ce(on_prem) / compute_ce(cloud)


class Catalog:
    """Immutable collection of CPU specs plus a designated cloud reference."""

    def __init__(self, entries: Mapping[str, CpuSpec] | list[CpuSpec], cloud_reference: str):
        if not isinstance(entries, Mapping):
            entries = {spec.model_name: spec for spec in entries}
        self._entries: dict[str, CpuSpec] = dict(entries)
        if not self._entries:
            raise CatalogError("catalog has no entries")
        if cloud_reference not in self._entries:
            raise CatalogError(f"cloud reference {cloud_reference!r} is not in the catalog")
        self.cloud_reference = cloud_reference

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[CpuSpec]:
        return iter(self._entries.values())

    def __contains__(self, model_name: str) -> bool:
        return model_name in self._entries

    @property
    def cloud_spec(self) -> CpuSpec:
        return self._entries[self.cloud_reference]

    def model_names(self) -> list[str]:
        return sorted(self._entries)

    def lookup(self, model_name: str) -> CpuSpec:
        """Return the entry for ``model_name`` or raise with a spelling hint."""
        try:
            return self._entries[model_name]
        except KeyError:
            close = difflib.get_close_matches(model_name, self._entries, n=3)
            hint = f" (did you mean: {', '.join(close)}?)" if close else ""
            raise CatalogError(f"unknown CPU model {model_name!r}{hint}") from None

    def lift_and_shift(self, model_name: str) -> float:
        """Lift-and-shift energy fraction of a model against the cloud reference."""
        return lift_and_shift_fraction(self.lookup(model_name), self.cloud_spec)


def _parse_bool(text: str, line: int) -> bool:
    lowered = text.strip().lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    raise CatalogError(f"line {line}: cloud must be 'true' or 'false', got {text!r}")


def load_catalog(source, cloud_reference: str | None = None) -> Catalog:
    """Parse a catalog CSV into a :class:`Catalog`.

    ``source`` may be a path or an open text stream. Columns must match
    ``CATALOG_COLUMNS`` exactly. When ``cloud_reference`` is omitted the
    cloud-flagged entry with the newest release date is used (ties broken
    by model name).
    """
    if hasattr(source, "read"):
        return _load_catalog_stream(source, cloud_reference)
    path = Path(source)
    try:
        stream = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CatalogError(f"cannot read catalog {path}: {exc}") from exc
    with stream:
        return _load_catalog_stream(stream, cloud_reference)


def _load_catalog_stream(stream, cloud_reference: str | None) -> Catalog:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise CatalogError("catalog file is empty") from None
    if tuple(h.strip() for h in header) != CATALOG_COLUMNS:
        raise CatalogError(
            f"line 1: expected header {','.join(CATALOG_COLUMNS)!r}, got {','.join(header)!r}"
        )

    entries: dict[str, CpuSpec] = {}
    seen_lines: dict[str, int] = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(CATALOG_COLUMNS):
            raise CatalogError(f"line {line}: expected {len(CATALOG_COLUMNS)} fields, got {len(row)}")
        name = row[0].strip()
        if name in entries:
            raise CatalogError(
                f"line {line}: duplicate model {name!r} (first defined on line {seen_lines[name]})"
            )
        try:
            score = float(row[1])
            tdp = float(row[2])
        except ValueError as exc:
            raise CatalogError(f"line {line}: {exc}") from None
        try:
            released = dt.date.fromisoformat(row[3].strip())
        except ValueError:
            raise CatalogError(f"line {line}: release_date must be YYYY-MM-DD, got {row[3]!r}") from None
        try:
            cores = int(row[4])
        except ValueError:
            raise CatalogError(f"line {line}: cores must be an integer, got {row[4]!r}") from None
        is_cloud = _parse_bool(row[5], line)
        try:
            entries[name] = CpuSpec(name, score, tdp, released, cores, is_cloud)
        except CatalogError as exc:
            raise CatalogError(f"line {line}: {exc}") from None
        seen_lines[name] = line

    if not entries:
        raise CatalogError("catalog has no data rows")

    if cloud_reference is None:
        cloud_models = [name for name, spec in entries.items() if spec.cloud]
        if not cloud_models:
            raise CatalogError("no cloud-flagged entry in catalog and no cloud reference given")
        cloud_reference = max(cloud_models, key=lambda n: (entries[n].release_date, n))
    elif cloud_reference not in entries:
        close = difflib.get_close_matches(cloud_reference, entries, n=3)
        hint = f" (did you mean: {', '.join(close)}?)" if close else ""
        raise CatalogError(f"cloud reference {cloud_reference!r} is not in the catalog{hint}")

    return Catalog(entries, cloud_reference)


def bundled_catalog(cloud_reference: str | None = None) -> Catalog:
    """Load the small fictional catalog shipped with the package."""
    text = resources.files("migrent.data").joinpath("fixture_catalog.csv").read_text("utf-8")
    return load_catalog(io.StringIO(text), cloud_reference)
