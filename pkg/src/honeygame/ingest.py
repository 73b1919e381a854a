"""Deriving transition probabilities from capture-the-flag tallies.

Experiment records count flag captures per (service, defense mechanism).
The derivation pools every non-honeypatch defense into a single
"no honeypot" capture rate per service and reads the trap and
real-flag-despite-honeypot rates off the honeypatch rows. The shipped
``ictf_summary.csv`` fixture holds the study tallies behind the tuned
transition model; :func:`compare_with_published` surfaces where the
published tuned parameters differ from these raw ratios.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

from .scenario import ExploitOutcomes, tuned_transition_model

DEFENSES = ("none", "snort", "honeypatch")
RECORD_HEADER = "service,defense,real,honeypot,attempts"


class RecordError(ValueError):
    """Malformed or inconsistent experiment records."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class ExperimentRecord:
    """Capture tally for one service under one defense mechanism."""

    service: str
    defense: str
    real_flag_captures: int
    honeypot_flag_captures: int
    attempts: int

    def __post_init__(self):
        if self.defense not in DEFENSES:
            raise RecordError(f"unknown defense {self.defense!r} (expected one of {DEFENSES})")
        for field_name in ("real_flag_captures", "honeypot_flag_captures", "attempts"):
            if getattr(self, field_name) < 0:
                raise RecordError(f"{self.service}/{self.defense}: negative {field_name}")
        if self.real_flag_captures > self.attempts:
            raise RecordError(
                f"{self.service}/{self.defense}: real captures exceed attempts "
                f"({self.real_flag_captures}/{self.attempts})"
            )
        if self.honeypot_flag_captures > self.attempts:
            raise RecordError(
                f"{self.service}/{self.defense}: honeypot captures exceed attempts "
                f"({self.honeypot_flag_captures}/{self.attempts})"
            )
        if self.defense != "honeypatch" and self.honeypot_flag_captures:
            raise RecordError(
                f"{self.service}/{self.defense}: honeypot captures without a honeypatch"
            )


def parse_experiment_records(text: str) -> list[ExperimentRecord]:
    """Parse ``service,defense,real,honeypot,attempts`` lines (header required)."""
    lines = [line.strip() for line in text.splitlines()]
    rows = [(i, line) for i, line in enumerate(lines, start=1) if line]
    if not rows:
        raise RecordError("no records")
    header_line, header = rows[0]
    if header.replace(" ", "") != RECORD_HEADER:
        raise RecordError(f"expected header {RECORD_HEADER!r}", header_line)
    if len(rows) == 1:
        raise RecordError("no records")
    records = []
    for line_no, line in rows[1:]:
        fields = [field.strip() for field in line.split(",")]
        if len(fields) != 5:
            raise RecordError(f"expected 5 comma-separated fields, got {len(fields)}", line_no)
        try:
            counts = [int(field) for field in fields[2:]]
        except ValueError:
            raise RecordError(f"counts must be integers: {line!r}", line_no) from None
        try:
            records.append(ExperimentRecord(fields[0], fields[1], *counts))
        except RecordError as exc:
            raise RecordError(str(exc), line_no) from None
    return records


def serialize_experiment_records(records: list[ExperimentRecord]) -> str:
    lines = [RECORD_HEADER]
    for record in records:
        lines.append(
            f"{record.service},{record.defense},{record.real_flag_captures},"
            f"{record.honeypot_flag_captures},{record.attempts}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DerivedParams:
    """Per-service probabilities derived from tallies.

    A field is ``None`` when the corresponding cell had zero attempts
    (insufficient data), never silently 0/0.
    """

    p_real_no_hp: float | None
    p_trap: float | None
    p_real_hp: float | None

    def as_outcomes(self) -> ExploitOutcomes:
        missing = [
            name
            for name, value in (
                ("p_real_no_hp", self.p_real_no_hp),
                ("p_trap", self.p_trap),
                ("p_real_hp", self.p_real_hp),
            )
            if value is None
        ]
        if missing:
            raise RecordError(f"insufficient data for {', '.join(missing)}")
        return ExploitOutcomes(self.p_real_no_hp, self.p_trap, self.p_real_hp)


def derive_transition_probabilities(
    records: list[ExperimentRecord],
) -> dict[str, DerivedParams]:
    """Capture ratios per service: trap and real-flag rates over honeypatch
    attempts, and the pooled real-flag rate over all non-honeypatch attempts.
    """
    services = []
    for record in records:
        if record.service not in services:
            services.append(record.service)
    derived = {}
    for service in services:
        rows = [record for record in records if record.service == service]
        hp_attempts = sum(r.attempts for r in rows if r.defense == "honeypatch")
        plain_attempts = sum(r.attempts for r in rows if r.defense != "honeypatch")
        p_trap = p_real_hp = p_real_no_hp = None
        if hp_attempts:
            p_trap = (
                sum(r.honeypot_flag_captures for r in rows if r.defense == "honeypatch")
                / hp_attempts
            )
            p_real_hp = (
                sum(r.real_flag_captures for r in rows if r.defense == "honeypatch")
                / hp_attempts
            )
        if plain_attempts:
            p_real_no_hp = (
                sum(r.real_flag_captures for r in rows if r.defense != "honeypatch")
                / plain_attempts
            )
        derived[service] = DerivedParams(p_real_no_hp, p_trap, p_real_hp)
    return derived


@dataclass(frozen=True)
class Discrepancy:
    """One derived-vs-published comparison cell."""

    service: str
    field: str
    derived: float | None
    published: float
    mismatch: bool


def compare_with_published(
    derived: dict[str, DerivedParams],
    published: dict[str, ExploitOutcomes] | None = None,
    tolerance: float = 0.005,
) -> list[Discrepancy]:
    """Side-by-side comparison of derived ratios against published values.

    Defaults to the shipped tuned transition model. Cells differing by
    more than ``tolerance`` (published values are two-decimal) are
    flagged as mismatches, as are cells with insufficient data.
    """
    published = tuned_transition_model() if published is None else published
    report = []
    for service, reference in published.items():
        if service not in derived:
            continue
        values = derived[service]
        for field_name in ("p_real_no_hp", "p_trap", "p_real_hp"):
            derived_value = getattr(values, field_name)
            published_value = getattr(reference, field_name)
            mismatch = (
                derived_value is None or abs(derived_value - published_value) > tolerance
            )
            report.append(
                Discrepancy(service, field_name, derived_value, published_value, mismatch)
            )
    return report


def study_summary_text() -> str:
    """The shipped capture-the-flag experiment tallies (CSV text)."""
    resource = importlib.resources.files("honeygame.data").joinpath("ictf_summary.csv")
    return resource.read_text(encoding="utf-8")
