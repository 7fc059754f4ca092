"""Team preparedness scoring: per-team preparedness, pairwise deltas, and
the alpha-weighted unified preparedness/balance score.

Preparedness normalizes the six team factors (skills, knowledge,
resources, cohesion, adaptability, experience) by six times the factor
scale, so it always lands in [0, 1]. The unified score blends average
preparedness against cross-team balance:

    score = alpha * p_avg + (1 - alpha) * (1 - mean(|delta|))

Means use exact rational accumulation (statistics.mean), so uniform team
sets reduce to the closed form alpha * p + (1 - alpha) without float
drift.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .errors import ValidationError

FACTOR_NAMES = ("S", "K", "R", "C", "A", "E")
FACTORS_PER_PROFILE = len(FACTOR_NAMES)


@dataclass(frozen=True)
class TeamProfile:
    """Six preparedness factors on a shared 0..scale_max scale."""

    team_id: str
    skills: float
    knowledge: float
    resources: float
    cohesion: float
    adaptability: float
    experience: float
    scale_max: float = 10.0

    def __post_init__(self):
        if self.scale_max <= 0:
            raise ValidationError(f"scale_max must be positive, got {self.scale_max}")
        for name, value in zip(FACTOR_NAMES, self.factors):
            if not 0 <= value <= self.scale_max:
                raise ValidationError(
                    f"factor {name} = {value} out of range [0, {self.scale_max}] "
                    f"for team {self.team_id!r}"
                )

    @property
    def factors(self) -> tuple[float, ...]:
        return (
            self.skills,
            self.knowledge,
            self.resources,
            self.cohesion,
            self.adaptability,
            self.experience,
        )


@dataclass(frozen=True)
class PreparednessScore:
    team_id: str
    value: float
    p_max_used: float


@dataclass(frozen=True)
class DeltaReport:
    team_a: str
    team_b: str
    delta: float


@dataclass(frozen=True)
class UpbsResult:
    alpha: float
    beta: float
    p_avg: float
    mean_abs_delta: float
    score: float
    team_ids: tuple[str, ...] = field(default=())


def preparedness(profile: TeamProfile) -> PreparednessScore:
    """Sum of the six factors over 6 * scale_max, in [0, 1]."""
    p_max = FACTORS_PER_PROFILE * profile.scale_max
    return PreparednessScore(
        team_id=profile.team_id,
        value=sum(profile.factors) / p_max,
        p_max_used=p_max,
    )


def preparedness_delta(p1: PreparednessScore, p2: PreparednessScore) -> DeltaReport:
    """Signed difference p1 - p2 in [-1, 1]; positive means p1 is more prepared."""
    for p in (p1, p2):
        if not 0 <= p.value <= 1:
            raise ValidationError(f"preparedness of {p.team_id!r} out of [0, 1]: {p.value}")
    return DeltaReport(team_a=p1.team_id, team_b=p2.team_id, delta=p1.value - p2.value)


def mean_abs_delta(profiles: Sequence[TeamProfile]) -> float:
    """Mean |delta| over all unordered team pairs; 0 for a single team."""
    if not profiles:
        raise ValidationError("mean_abs_delta needs at least one profile")
    scores = [preparedness(p).value for p in profiles]
    if len(scores) == 1:
        return 0.0
    return statistics.mean(abs(a - b) for a, b in combinations(scores, 2))


def upbs(profiles: Sequence[TeamProfile], alpha: float) -> UpbsResult:
    """Unified preparedness/balance score at the given alpha weight.

    alpha = 1 scores pure average preparedness; alpha = 0 scores pure
    balance. A single team is vacuously balanced (balance term 1).
    """
    if not 0 <= alpha <= 1:
        raise ValidationError(f"alpha must be in [0, 1], got {alpha}")
    if not profiles:
        raise ValidationError("upbs needs at least one profile")
    p_avg = statistics.mean(preparedness(p).value for p in profiles)
    mad = mean_abs_delta(profiles)
    beta = 1 - alpha
    return UpbsResult(
        alpha=alpha,
        beta=beta,
        p_avg=p_avg,
        mean_abs_delta=mad,
        score=alpha * p_avg + beta * (1 - mad),
        team_ids=tuple(p.team_id for p in profiles),
    )


def upbs_sweep(profiles: Sequence[TeamProfile], alphas: Iterable[float]) -> list[UpbsResult]:
    """One UpbsResult per alpha over the same team set."""
    return [upbs(profiles, alpha) for alpha in alphas]


@dataclass(frozen=True)
class ScoreTableRow:
    configuration: str
    alpha: float
    p_avg: float
    mean_abs_delta: float
    upbs: float


def emit_score_table(
    configurations: dict[str, Sequence[TeamProfile]],
    alphas: Iterable[float],
) -> list[ScoreTableRow]:
    """Configuration x alpha score table, ready to plot or dump as CSV."""
    if not configurations:
        raise ValidationError("emit_score_table needs at least one configuration")
    alphas = list(alphas)
    rows: list[ScoreTableRow] = []
    for name, profiles in configurations.items():
        for result in upbs_sweep(profiles, alphas):
            rows.append(
                ScoreTableRow(
                    configuration=name,
                    alpha=result.alpha,
                    p_avg=result.p_avg,
                    mean_abs_delta=result.mean_abs_delta,
                    upbs=result.score,
                )
            )
    return rows


SCORE_TABLE_COLUMNS = ("configuration", "alpha", "p_avg", "mean_abs_delta", "upbs")
PROFILE_COLUMNS = ("team_id", "S", "K", "R", "C", "A", "E", "scale_max")


def write_score_table(
    rows: Sequence[ScoreTableRow], out: TextIO, precision: int | None = None
) -> None:
    """Dump rows as CSV. ``precision`` formats the numeric cells for
    presentation; by default values are written unrounded."""

    def fmt(value: float) -> str:
        return f"{value:.{precision}f}" if precision is not None else repr(value)

    writer = csv.writer(out)
    writer.writerow(SCORE_TABLE_COLUMNS)
    for row in rows:
        writer.writerow(
            [row.configuration, fmt(row.alpha), fmt(row.p_avg), fmt(row.mean_abs_delta), fmt(row.upbs)]
        )


def load_profiles(source: TextIO | str | Path) -> list[TeamProfile]:
    """Read team profiles from CSV with a required header row.

    Columns: team_id, S, K, R, C, A, E, scale_max. Parse errors carry the
    offending line number.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as handle:
            return load_profiles(handle)

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("profile file is empty; header row required") from None
    normalized = [column.strip() for column in header]
    if normalized != list(PROFILE_COLUMNS):
        raise ValidationError(
            f"line 1: expected header {','.join(PROFILE_COLUMNS)}, got {','.join(normalized)}"
        )

    profiles: list[TeamProfile] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(PROFILE_COLUMNS):
            raise ValidationError(
                f"line {line_no}: expected {len(PROFILE_COLUMNS)} columns, got {len(row)}"
            )
        team_id = row[0].strip()
        try:
            values = [float(cell) for cell in row[1:]]
        except ValueError as exc:
            raise ValidationError(f"line {line_no}: {exc}") from None
        try:
            profiles.append(
                TeamProfile(
                    team_id=team_id,
                    skills=values[0],
                    knowledge=values[1],
                    resources=values[2],
                    cohesion=values[3],
                    adaptability=values[4],
                    experience=values[5],
                    scale_max=values[6],
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"line {line_no}: {exc.message}") from None
    return profiles
