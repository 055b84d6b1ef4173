"""Open-set protocol materialization.

A protocol names three class roles (known / negative / unknown), each
resolved from taxonomy roots by a selection rule. Materializing a
protocol against the source image listings produces a deterministic
per-sample manifest: original training images of known and negative
classes are split 80/20 into train/val with a pinned PRNG, original
validation images become the test split, and unknown classes appear at
test time only.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple

from ._rng import SplitMix64, fisher_yates, fnv1a64
from .errors import OsrError, ParseError
from .taxonomy import Taxonomy, is_descendant, is_synset_id, leaf_descendants

ROLES = ("known", "negative", "unknown")
SPLITS = ("train", "val", "test")

BUILTIN_PROTOCOLS = ("p1", "p2", "p3")

MANIFEST_MAGIC = "# osr-manifest v1"
SPEC_MAGIC = "# osr-protocol-spec v1"


@dataclass(frozen=True)
class SelectionRule:
    """How a root contributes leaf classes: every leaf, an explicit id
    list, or one half of the bytewise-sorted leaf list (first half takes
    the ceiling when the count is odd)."""

    kind: str  # all-leaves | explicit | half-split
    ids: tuple[str, ...] = ()
    part: str = ""

    def resolve(self, t: Taxonomy, root: str) -> list[str]:
        leaf_set = leaf_descendants(t, root)
        if self.kind == "all-leaves":
            return leaf_set
        if self.kind == "half-split":
            cut = (len(leaf_set) + 1) // 2
            return leaf_set[:cut] if self.part == "first" else leaf_set[cut:]
        ilsvrc = set(t.ilsvrc_leaves)
        members = set(leaf_set)
        for synset in self.ids:
            if synset not in ilsvrc:
                raise OsrError(f"explicit class {synset} is not an ILSVRC leaf")
            if synset not in members:
                raise OsrError(f"explicit class {synset} is not under root {root}")
        return sorted(self.ids)


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    known_roots: tuple[tuple[str, SelectionRule], ...]
    negative_roots: tuple[tuple[str, SelectionRule], ...]
    unknown_roots: tuple[tuple[str, SelectionRule], ...]
    expected_counts: tuple[int, int, int] | None = None

    def roots_for(self, role: str) -> tuple[tuple[str, SelectionRule], ...]:
        return {
            "known": self.known_roots,
            "negative": self.negative_roots,
            "unknown": self.unknown_roots,
        }[role]


class ResolvedClasses(NamedTuple):
    known: list[str]
    negative: list[str]
    unknown: list[str]


@dataclass(frozen=True)
class SampleRecord:
    path: str
    synset: str
    class_index: int
    role: str
    split: str

    def validate(self) -> None:
        if self.role == "known":
            if self.class_index < 1:
                raise OsrError(
                    f"known record {self.path} must have class_index >= 1"
                )
        elif self.role == "negative":
            if self.class_index != 0:
                raise OsrError(
                    f"negative record {self.path} must have class_index 0"
                )
        elif self.role == "unknown":
            if self.class_index != -1:
                raise OsrError(
                    f"unknown record {self.path} must have class_index -1"
                )
            if self.split != "test":
                raise OsrError(
                    f"unknown record {self.path} must be in the test split"
                )
        else:
            raise OsrError(f"bad role {self.role!r}")
        if self.split not in SPLITS:
            raise OsrError(f"bad split {self.split!r}")

    def sort_key(self) -> tuple[str, str, str, str]:
        return (self.role, self.synset, self.split, self.path)


@dataclass(frozen=True)
class ProtocolManifest:
    protocol: str
    seed: int
    K: int
    records: tuple[SampleRecord, ...]

    def counts(self) -> dict[tuple[str, str], int]:
        out: dict[tuple[str, str], int] = {}
        for r in self.records:
            key = (r.role, r.split)
            out[key] = out.get(key, 0) + 1
        return out


# -- protocol spec files -----------------------------------------------------

def parse_protocol_spec(text: str) -> ProtocolSpec:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(SPEC_MAGIC):
        raise ParseError(f"missing '{SPEC_MAGIC}' header", 1)
    header = dict(
        kv.split("=", 1) for kv in lines[0][len(SPEC_MAGIC):].split() if "=" in kv
    )
    name = header.get("name")
    if not name:
        raise ParseError("spec header missing name=", 1)

    expected: tuple[int, int, int] | None = None
    roles: dict[str, list[tuple[str, SelectionRule]]] = {r: [] for r in ROLES}
    for line_no, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# expect "):
                kv = dict(p.split("=", 1) for p in line[9:].split() if "=" in p)
                try:
                    expected = tuple(int(kv[r]) for r in ROLES)  # type: ignore[assignment]
                except (KeyError, ValueError) as exc:
                    raise ParseError(f"bad expect line: {exc}", line_no)
            continue
        parts = line.split()
        if len(parts) < 3 or parts[0] not in ROLES:
            raise ParseError(f"expected '<role> <synset> <rule>', got {line!r}", line_no)
        role, root, rule_kind = parts[0], parts[1], parts[2]
        if not is_synset_id(root):
            raise ParseError(f"malformed synset id {root!r}", line_no)
        if rule_kind == "all-leaves":
            if len(parts) != 3:
                raise ParseError("all-leaves takes no arguments", line_no)
            rule = SelectionRule("all-leaves")
        elif rule_kind == "half-split":
            if len(parts) != 4 or parts[3] not in ("first", "second"):
                raise ParseError("half-split needs 'first' or 'second'", line_no)
            rule = SelectionRule("half-split", part=parts[3])
        elif rule_kind == "explicit":
            ids = parts[3:]
            if not ids:
                raise ParseError("explicit rule needs at least one id", line_no)
            for synset in ids:
                if not is_synset_id(synset):
                    raise ParseError(f"malformed synset id {synset!r}", line_no)
            if len(set(ids)) != len(ids):
                raise ParseError("duplicate id in explicit list", line_no)
            rule = SelectionRule("explicit", ids=tuple(ids))
        else:
            raise ParseError(f"unknown selection rule {rule_kind!r}", line_no)
        roles[role].append((root, rule))

    return ProtocolSpec(
        name=name,
        known_roots=tuple(roles["known"]),
        negative_roots=tuple(roles["negative"]),
        unknown_roots=tuple(roles["unknown"]),
        expected_counts=expected,
    )


def format_protocol_spec(spec: ProtocolSpec) -> str:
    lines = [f"{SPEC_MAGIC} name={spec.name}"]
    if spec.expected_counts is not None:
        k, n, u = spec.expected_counts
        lines.append(f"# expect known={k} negative={n} unknown={u}")
    for role in ROLES:
        for root, rule in spec.roots_for(role):
            if rule.kind == "all-leaves":
                lines.append(f"{role} {root} all-leaves")
            elif rule.kind == "half-split":
                lines.append(f"{role} {root} half-split {rule.part}")
            else:
                lines.append(f"{role} {root} explicit " + " ".join(rule.ids))
    return "\n".join(lines) + "\n"


def builtin_protocol(name: str) -> ProtocolSpec:
    name = name.lower()
    if name not in BUILTIN_PROTOCOLS:
        raise OsrError(
            f"unknown builtin protocol {name!r}; choose from {BUILTIN_PROTOCOLS}"
        )
    text = (
        resources.files("osr").joinpath(f"data/protocols/{name}.txt").read_text()
    )
    return parse_protocol_spec(text)


def bundled_metadata_texts() -> tuple[str, str, str]:
    """(is_a, words, ilsvrc) texts for the bundled ILSVRC-restricted graph."""
    base = resources.files("osr").joinpath("data/metadata")
    return (
        base.joinpath("is_a.txt").read_text(),
        base.joinpath("words.txt").read_text(),
        base.joinpath("ilsvrc_synsets.txt").read_text(),
    )


# -- class resolution ---------------------------------------------------------

def resolve_classes(t: Taxonomy, spec: ProtocolSpec) -> ResolvedClasses:
    """Resolve each role to its sorted leaf-class list; roles must be
    pairwise disjoint and non-empty."""
    resolved: dict[str, list[str]] = {}
    for role in ROLES:
        classes: set[str] = set()
        for root, rule in spec.roots_for(role):
            classes.update(rule.resolve(t, root))
        if not classes:
            raise OsrError(f"protocol {spec.name}: role {role!r} resolved to no classes")
        resolved[role] = sorted(classes)

    for a in range(len(ROLES)):
        for b in range(a + 1, len(ROLES)):
            overlap = set(resolved[ROLES[a]]) & set(resolved[ROLES[b]])
            if overlap:
                listing = ", ".join(sorted(overlap)[:10])
                raise OsrError(
                    f"protocol {spec.name}: roles {ROLES[a]} and {ROLES[b]} "
                    f"overlap on: {listing}"
                )
    return ResolvedClasses(resolved["known"], resolved["negative"], resolved["unknown"])


def count_mismatches(spec: ProtocolSpec, resolved: ResolvedClasses) -> list[str]:
    """Differences between resolved class counts and the spec's expected
    counts. Mismatches are reported to the caller, never fixed up."""
    if spec.expected_counts is None:
        return []
    out = []
    for role, expected, got in zip(ROLES, spec.expected_counts, resolved):
        if len(got) != expected:
            out.append(
                f"protocol {spec.name}: expected {expected} {role} classes, "
                f"resolved {len(got)}"
            )
    return out


# -- train/val splitting ------------------------------------------------------

def split_train_val(
    samples: list[str], seed: int, synset: str
) -> tuple[list[str], list[str]]:
    """Split one class's sample paths 80/20.

    The shuffle is a Fisher-Yates permutation driven by SplitMix64
    seeded with ``seed XOR fnv1a64(synset)``, so every class has an
    independent stream and the partition is reproducible bit for bit.
    Train takes the first floor(0.8 n) shuffled samples; both halves are
    re-sorted bytewise.
    """
    n = len(samples)
    if n == 0:
        raise OsrError(f"no samples to split for {synset}")
    if samples != sorted(samples) or len(set(samples)) != n:
        raise OsrError(f"samples for {synset} must be sorted and duplicate-free")
    if n < 5:
        warnings.warn(
            f"{synset}: only {n} samples; the 80/20 split leaves "
            f"{n - (4 * n) // 5} validation sample(s)",
            stacklevel=2,
        )
    rng = SplitMix64(seed ^ fnv1a64(synset.encode("ascii")))
    shuffled = fisher_yates(samples, rng)
    cut = (4 * n) // 5
    return sorted(shuffled[:cut]), sorted(shuffled[cut:])


# -- source image listings ----------------------------------------------------

def parse_source_manifest(text: str) -> dict[str, list[str]]:
    """Parse ``relative/path synsetId`` lines into synset -> sorted paths."""
    by_synset: dict[str, set[str]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'path synsetId', got {line!r}", line_no)
        path, synset = parts
        if not is_synset_id(synset):
            raise ParseError(f"malformed synset id {synset!r}", line_no)
        by_synset.setdefault(synset, set()).add(path)
    return {s: sorted(paths) for s, paths in by_synset.items()}


# -- manifest construction ----------------------------------------------------

def build_protocol(
    t: Taxonomy,
    spec: ProtocolSpec,
    train_manifest: str,
    val_manifest: str,
    seed: int,
) -> ProtocolManifest:
    """Materialize a protocol into per-sample records.

    Known and negative classes draw train/val from the original training
    images and test from the original validation images; unknown classes
    contribute test records only.
    """
    resolved = resolve_classes(t, spec)
    train_src = parse_source_manifest(train_manifest)
    val_src = parse_source_manifest(val_manifest)

    index_of = {synset: i + 1 for i, synset in enumerate(resolved.known)}
    records: list[SampleRecord] = []

    def emit(paths: list[str], synset: str, class_index: int, role: str, split: str):
        for path in paths:
            records.append(SampleRecord(path, synset, class_index, role, split))

    for role, classes in (("known", resolved.known), ("negative", resolved.negative)):
        for synset in classes:
            class_index = index_of[synset] if role == "known" else 0
            train_paths = train_src.get(synset, [])
            test_paths = val_src.get(synset, [])
            if not train_paths:
                raise OsrError(f"class {synset} has no images in the train manifest")
            if not test_paths:
                raise OsrError(f"class {synset} has no images in the val manifest")
            train, val = split_train_val(train_paths, seed, synset)
            emit(train, synset, class_index, role, "train")
            emit(val, synset, class_index, role, "val")
            emit(test_paths, synset, class_index, role, "test")

    for synset in resolved.unknown:
        test_paths = val_src.get(synset, [])
        if not test_paths:
            raise OsrError(f"class {synset} has no images in the val manifest")
        emit(test_paths, synset, -1, "unknown", "test")

    records.sort(key=SampleRecord.sort_key)
    manifest = ProtocolManifest(
        protocol=spec.name, seed=seed, K=len(resolved.known), records=tuple(records)
    )
    for record in manifest.records:
        record.validate()
    return manifest


# -- manifest file I/O ----------------------------------------------------------

_MANIFEST_HEADER = ["path", "synset", "class_index", "role", "split"]


def format_manifest(m: ProtocolManifest) -> str:
    buf = io.StringIO()
    buf.write(f"{MANIFEST_MAGIC} protocol={m.protocol} seed={m.seed} K={m.K}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_MANIFEST_HEADER)
    for r in m.records:
        writer.writerow([r.path, r.synset, r.class_index, r.role, r.split])
    return buf.getvalue()


def write_manifest(m: ProtocolManifest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(format_manifest(m))


def parse_manifest(text: str) -> ProtocolManifest:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MANIFEST_MAGIC):
        raise ParseError(f"missing '{MANIFEST_MAGIC}' header", 1)
    header = dict(
        kv.split("=", 1) for kv in lines[0][len(MANIFEST_MAGIC):].split() if "=" in kv
    )
    try:
        protocol = header["protocol"]
        seed = int(header["seed"])
        K = int(header["K"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad manifest header: {exc}", 1)

    reader = csv.reader(lines[1:])
    rows = list(reader)
    if not rows or rows[0] != _MANIFEST_HEADER:
        raise ParseError("missing column header row", 2)

    records = []
    for offset, row in enumerate(rows[1:], start=3):
        if len(row) != 5:
            raise ParseError(f"expected 5 fields, got {len(row)}", offset)
        path, synset, idx_text, role, split = row
        if not is_synset_id(synset):
            raise ParseError(f"malformed synset id {synset!r}", offset)
        try:
            class_index = int(idx_text)
        except ValueError:
            raise ParseError(f"bad class_index {idx_text!r}", offset)
        record = SampleRecord(path, synset, class_index, role, split)
        try:
            record.validate()
        except OsrError as exc:
            raise ParseError(str(exc), offset)
        if role == "known" and class_index > K:
            raise ParseError(f"class_index {class_index} exceeds K={K}", offset)
        records.append(record)

    keys = [r.sort_key() for r in records]
    if keys != sorted(keys):
        raise ParseError("manifest rows are not in canonical order")
    return ProtocolManifest(protocol=protocol, seed=seed, K=K, records=tuple(records))


def read_manifest(path) -> ProtocolManifest:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return parse_manifest(f.read())
