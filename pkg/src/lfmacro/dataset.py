"""Corpus scanning, variation-held-out splits and representation export.

A corpus is a directory tree of light-field directories (see
:mod:`lfmacro.io`). :class:`LayoutSpec` maps each light field's relative
path to ``(subject, session, variation, sublabel)``. Splits hold out one
variation category for testing across all subjects and train on the rest.
"""

from __future__ import annotations

import csv
import io as _io
import json
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import CenterPolicy
from .errors import ExportAbortedError, FormatError, LightFieldError, ParameterError
from .io import META_NAME, encode_png, read_lightfield_with_policy, write_json
from .representations import build_macropixel, center_view, extract_epi, to_lenslet

CATEGORIES = ("expression", "pose", "illumination", "occlusion")
SPLITS = ("train", "test", "unassigned")
CSV_HEADER = ("path", "subject", "session", "variation", "split")
REPR_KINDS = ("center", "macropixel", "lenslet", "epi")

DEFAULT_PATTERN = (
    r"(?P<subject>[^/]+)/session(?P<session>[0-9]+)/"
    r"(?P<variation>[A-Za-z]+)(?:_(?P<sublabel>[^/]+))?"
)


class EmptyManifestWarning(UserWarning):
    pass


class EmptySplitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LayoutSpec:
    """How relative light-field paths encode subject, session and variation.

    ``pattern`` is a regular expression matched against the whole
    POSIX-style relative path of each light-field directory; it must define
    the named groups ``subject``, ``session`` and ``variation`` and may
    define ``sublabel``. ``counts`` records the expected number of light
    fields per category per subject per session (not enforced by scans).
    """

    pattern: str = DEFAULT_PATTERN
    categories: tuple[str, ...] = CATEGORIES
    counts: dict = field(default_factory=lambda: {c: 5 for c in CATEGORIES})

    def parse(self, relpath: str) -> Optional[dict]:
        m = re.fullmatch(self.pattern, relpath)
        if m is None:
            return None
        groups = m.groupdict()
        try:
            session = int(groups["session"])
        except (KeyError, TypeError, ValueError):
            return None
        if session not in (1, 2) or groups.get("variation") not in self.categories:
            return None
        return {"subject": groups["subject"], "session": session,
                "variation": groups["variation"], "sublabel": groups.get("sublabel") or ""}


@dataclass(frozen=True)
class SampleRecord:
    path: str
    subject: str
    session: int
    variation: str
    sublabel: str = ""
    split: str = "unassigned"

    def __post_init__(self):
        if self.session not in (1, 2):
            raise ParameterError(f"session must be 1 or 2, got {self.session!r}")
        if self.split not in SPLITS:
            raise ParameterError(f"split must be one of {SPLITS}, got {self.split!r}")

    @property
    def variation_label(self) -> str:
        """Category with optional sub-label, as stored in the CSV ``variation`` column."""
        return f"{self.variation}:{self.sublabel}" if self.sublabel else self.variation


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple[SampleRecord, ...]
    categories: tuple[str, ...] = CATEGORIES
    held_out: Optional[str] = None
    representation: Optional[dict] = None
    skipped: tuple[str, ...] = ()

    def __post_init__(self):
        for rec in self.records:
            if rec.variation not in self.categories:
                raise ParameterError(
                    f"{rec.path}: variation {rec.variation!r} not in {list(self.categories)}")

    def __len__(self) -> int:
        return len(self.records)

    def counts(self) -> dict:
        out = {s: 0 for s in SPLITS}
        for rec in self.records:
            out[rec.split] += 1
        return out

    def split_records(self, split: str) -> list[SampleRecord]:
        return [r for r in self.records if r.split == split]

    # -- serialisation --------------------------------------------------------

    def to_csv(self) -> str:
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.records:
            writer.writerow([r.path, r.subject, r.session, r.variation_label, r.split])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "categories": list(self.categories),
            "held_out": self.held_out,
            "representation": self.representation,
            "counts": self.counts(),
            "skipped": list(self.skipped),
            "records": [
                {"path": r.path, "subject": r.subject, "session": r.session,
                 "variation": r.variation, "sublabel": r.sublabel, "split": r.split}
                for r in self.records
            ],
        }

    def save(self, csv_path) -> tuple[Path, Path]:
        """Write the CSV and its JSON twin (same stem, ``.json``)."""
        csv_path = Path(csv_path)
        json_path = csv_path.with_suffix(".json")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())
        write_json(json_path, self.to_dict())
        return csv_path, json_path

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetManifest":
        try:
            records = tuple(
                SampleRecord(path=r["path"], subject=r["subject"], session=int(r["session"]),
                             variation=r["variation"], sublabel=r.get("sublabel", ""),
                             split=r["split"])
                for r in data["records"])
            return cls(records=records,
                       categories=tuple(data.get("categories", CATEGORIES)),
                       held_out=data.get("held_out"),
                       representation=data.get("representation"),
                       skipped=tuple(data.get("skipped", ())))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed manifest: {exc}") from None

    @classmethod
    def from_csv(cls, text: str, categories=CATEGORIES) -> "DatasetManifest":
        reader = csv.reader(_io.StringIO(text))
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise FormatError(f"manifest header must be {','.join(CSV_HEADER)}, got {header}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise FormatError(f"manifest line {lineno}: expected 5 fields, got {len(row)}")
            path, subject, session, variation, split = row
            variation, _, sublabel = variation.partition(":")
            try:
                records.append(SampleRecord(path, subject, int(session), variation, sublabel, split))
            except (ValueError, ParameterError) as exc:
                raise FormatError(f"manifest line {lineno}: {exc}") from None
        return cls(records=tuple(records), categories=tuple(categories),
                   held_out=_infer_held_out(records))

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        """Load from a ``.json`` twin, or from ``.csv`` (preferring its twin when present)."""
        path = Path(path)
        json_path = path if path.suffix == ".json" else path.with_suffix(".json")
        if json_path.exists():
            try:
                data = json.loads(json_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise FormatError(f"{json_path}: invalid JSON ({exc})") from None
            return cls.from_dict(data)
        return cls.from_csv(path.read_text(encoding="utf-8"))


def _infer_held_out(records) -> Optional[str]:
    """The category a CSV-only manifest was split on, if its splits say so unambiguously."""
    test = {r.variation for r in records if r.split == "test"}
    if len(test) != 1:
        return None
    (category,) = test
    if all((r.split == "test") == (r.variation == category) for r in records):
        return category
    return None


def scan_corpus(root, layout: Optional[LayoutSpec] = None) -> DatasetManifest:
    """One unassigned record per light-field directory under ``root``.

    Light fields are directories containing ``meta.json``. Records are
    ordered by relative path; entries the layout cannot parse are listed in
    ``manifest.skipped``. An empty result emits :class:`EmptyManifestWarning`.
    """
    root = Path(root)
    if not root.is_dir():
        raise FormatError(f"corpus root {root} is not a directory")
    layout = layout or LayoutSpec()
    found = sorted(p.parent.relative_to(root).as_posix() for p in root.rglob(META_NAME))
    records, skipped = [], []
    for rel in found:
        parsed = layout.parse(rel)
        if parsed is None:
            skipped.append(rel)
            continue
        records.append(SampleRecord(path=rel, **parsed))
    if not records:
        warnings.warn(f"no light fields found under {root}", EmptyManifestWarning, stacklevel=2)
    return DatasetManifest(records=tuple(records), categories=tuple(layout.categories),
                           skipped=tuple(skipped))


def split_by_variation(manifest: DatasetManifest, held_out: str) -> DatasetManifest:
    """Hold out every record of one variation category as test; the rest train."""
    if held_out not in manifest.categories:
        raise ParameterError(
            f"unknown category {held_out!r}; valid categories: {', '.join(manifest.categories)}")
    records = tuple(replace(r, split="test" if r.variation == held_out else "train")
                    for r in manifest.records)
    if not any(r.split == "test" for r in records):
        warnings.warn(f"held-out category {held_out!r} has no records; test split is empty",
                      EmptySplitWarning, stacklevel=2)
    return replace(manifest, records=records, held_out=held_out)


# -- export ---------------------------------------------------------------------

@dataclass(frozen=True)
class ReprSpec:
    """Which representation to export and its parameters.

    ``k`` and ``size_policy`` apply to macro-pixels; ``orientation``,
    ``fixed_spatial`` and ``fixed_angular`` to EPIs (a missing fixed index
    means the middle row/column or the middle view).
    """

    kind: str = "macropixel"
    k: int = 1
    size_policy: str = "crop"
    center: Optional[tuple[int, int]] = None
    orientation: str = "horizontal"
    fixed_spatial: Optional[int] = None
    fixed_angular: Optional[int] = None

    def __post_init__(self):
        if self.kind not in REPR_KINDS:
            raise ParameterError(f"kind must be one of {REPR_KINDS}, got {self.kind!r}")

    def metadata(self) -> dict:
        meta = {"kind": self.kind, "k": self.k}
        if self.kind == "macropixel":
            meta["size_policy"] = self.size_policy
        if self.center is not None:
            meta["center"] = list(self.center)
        if self.kind == "epi":
            meta.update(orientation=self.orientation, fixed_spatial=self.fixed_spatial,
                        fixed_angular=self.fixed_angular)
        return meta


@dataclass
class ExportReport:
    succeeded: int = 0
    failed: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"succeeded": self.succeeded, "failed": self.failed}


def render(lf, spec: ReprSpec, policy: Optional[CenterPolicy] = None) -> np.ndarray:
    """Image for one light field under ``spec``; ``spec.center`` overrides ``policy``."""
    if spec.center is not None:
        policy = CenterPolicy(*spec.center)
    policy = policy or CenterPolicy()
    if spec.kind == "center":
        return center_view(lf, policy)
    if spec.kind == "macropixel":
        return build_macropixel(lf, spec.k, policy, spec.size_policy).pixels
    if spec.kind == "lenslet":
        return to_lenslet(lf).pixels
    cu, cv = policy.resolve(lf.angular_rows, lf.angular_cols)
    if spec.orientation in ("horizontal", "h"):
        fixed_spatial = lf.height // 2 if spec.fixed_spatial is None else spec.fixed_spatial
        fixed_angular = cu if spec.fixed_angular is None else spec.fixed_angular
    else:
        fixed_spatial = lf.width // 2 if spec.fixed_spatial is None else spec.fixed_spatial
        fixed_angular = cv if spec.fixed_angular is None else spec.fixed_angular
    return extract_epi(lf, spec.orientation, fixed_spatial, fixed_angular).values


def _safe(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.-]+", "-", text).strip("-") or "x"


def output_names(records, spec: ReprSpec) -> list[str]:
    """Deterministic file names; repeats of the same stem get ``-2``, ``-3``, ..."""
    names, seen = [], {}
    for r in records:
        parts = [_safe(r.subject), f"s{r.session}", _safe(r.variation)]
        if r.sublabel:
            parts.append(_safe(r.sublabel))
        parts += [spec.kind, f"k{spec.k}"]
        stem = "_".join(parts)
        seen[stem] = seen.get(stem, 0) + 1
        names.append(stem if seen[stem] == 1 else f"{stem}-{seen[stem]}")
    return [n + ".png" for n in names]


def _render_record(root: Path, record: SampleRecord, spec: ReprSpec):
    try:
        lf, policy = read_lightfield_with_policy(root / record.path)
        return encode_png(render(lf, spec, policy)), None
    except (LightFieldError, OSError) as exc:
        return None, str(exc)


def export_representation(manifest: DatasetManifest, spec: ReprSpec, out_dir, root,
                          jobs: int = 1) -> ExportReport:
    """Write one image per record plus ``manifest.csv``/``.json`` and ``report.json``.

    Light fields are read relative to ``root``. A record that cannot be
    loaded or rendered is reported and skipped; a failure writing outputs
    raises :class:`ExportAbortedError` carrying the partial report. Output
    bytes do not depend on ``jobs``.
    """
    if jobs < 1:
        raise ParameterError(f"jobs must be >= 1, got {jobs}")
    root, out_dir = Path(root), Path(out_dir)
    names = output_names(manifest.records, spec)
    report = ExportReport()
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(lambda rec: _render_record(root, rec, spec), manifest.records)
            for record, name, (data, error) in zip(manifest.records, names, results):
                if error is not None:
                    report.failed.append({"path": record.path, "reason": error})
                    continue
                (out_dir / name).write_bytes(data)
                report.succeeded += 1
                report.outputs.append(name)
        exported = replace(manifest, representation=spec.metadata())
        exported.save(out_dir / "manifest.csv")
        write_json(out_dir / "report.json", report.to_dict())
    except OSError as exc:
        try:
            write_json(out_dir / "report.json", report.to_dict())
        except OSError:
            pass
        raise ExportAbortedError(f"export aborted: {exc}", report) from exc
    return report
