"""Core domain model: task-execution events, platform snapshots, derived profiles.

A task-execution event records that one volunteer completed one task of one
project at one instant. A snapshot is the deduplicated, time-bounded event
collection that every metric in this package is computed from; profiles are
per-volunteer and per-project aggregates derived from a snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from operator import itemgetter
from typing import Iterable, Mapping, NamedTuple


class EmptyDatasetError(ValueError):
    """No events remain after exclusion filtering."""


class InvalidTimestampError(ValueError):
    """A timestamp string could not be parsed as ISO-8601."""


class EventAfterObservationEndError(ValueError):
    """An event timestamp lies beyond the declared observation end."""


class TaskExecutionEvent(NamedTuple):
    """One task performed by one volunteer in one project at one instant."""

    volunteer_id: str
    task_id: str
    project_id: str
    timestamp: datetime  # timezone-aware, UTC


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp into a timezone-aware UTC datetime.

    Accepts both the ``2014-07-17T10:00:00Z`` and ``2014-07-17 10:00:00``
    forms. Naive timestamps are taken to be UTC; aware ones are converted.

    Raises:
        InvalidTimestampError: if the string is not valid ISO-8601.
    """
    text = raw.strip()
    if text.endswith(("Z", "z")):
        # datetime.fromisoformat() rejects the Z suffix before Python 3.11
        text = text[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(text)
    except (ValueError, TypeError) as exc:
        raise InvalidTimestampError(f"unparseable timestamp: {raw!r}") from exc
    tz = parsed.tzinfo
    if tz is None:
        return parsed.replace(tzinfo=timezone.utc)
    if tz is timezone.utc:
        # already the UTC singleton, astimezone would be an expensive no-op
        return parsed
    return parsed.astimezone(timezone.utc)


@dataclass(frozen=True)
class PlatformSnapshot:
    """Deduplicated, time-bounded event collection plus the observation end.

    Immutable after construction and safe to share across parallel workers.
    ``duplicates_removed`` counts the (volunteer, task) re-submissions dropped
    during deduplication; it is surfaced in reports but does not take part in
    snapshot equality.
    """

    events: tuple[TaskExecutionEvent, ...]
    observation_end: datetime
    excluded_projects: frozenset[str] = frozenset()
    duplicates_removed: int = field(default=0, compare=False)

    @property
    def event_count(self) -> int:
        return len(self.events)


@dataclass
class VolunteerProfile:
    """Per-volunteer activity history derived from a snapshot.

    ``join_instant`` is the first event unless a registration-date override
    was supplied at derivation; it never exceeds ``last_instant``.
    """

    volunteer_id: str
    join_instant: datetime
    last_instant: datetime
    active_days: set[date]
    per_project_active_days: dict[str, set[date]]
    per_project_task_count: dict[str, int]
    first_project: str

    @property
    def explored_project_count(self) -> int:
        """Number of distinct projects with at least one task by this volunteer."""
        return len(self.per_project_task_count)

    @property
    def regular_project_count(self) -> int:
        """Number of projects with tasks on at least two distinct calendar days."""
        return sum(1 for days in self.per_project_active_days.values() if len(days) >= 2)

    @property
    def event_count(self) -> int:
        return sum(self.per_project_task_count.values())


@dataclass
class ProjectProfile:
    """Per-project aggregates: availability window, volunteer sets, task count.

    ``recruited`` holds volunteers whose first-ever platform task was in this
    project; ``inherited`` holds the rest of its participants. The two sets
    partition ``volunteers``.
    """

    project_id: str
    first_event: datetime
    last_event: datetime
    volunteers: set[str]
    task_count: int
    recruited: set[str]
    inherited: set[str]


def build_snapshot(
    events: Iterable[TaskExecutionEvent],
    observation_end: datetime | None = None,
    exclusions: Iterable[str] = (),
) -> PlatformSnapshot:
    """Validate, filter, deduplicate, and order raw events into a snapshot.

    Events from excluded projects are dropped first. Duplicate
    (volunteer_id, task_id) pairs keep the record with the earliest timestamp:
    a task is one unit of contribution and re-submissions are noise. Surviving
    events are sorted by (timestamp, volunteer_id, task_id) so downstream
    derivation is deterministic. When ``observation_end`` is absent it
    defaults to the maximum event timestamp.

    Raises:
        EmptyDatasetError: no events survive exclusion filtering.
        EventAfterObservationEndError: an event postdates ``observation_end``.
        ValueError: an event carries an empty id.
    """
    excluded = frozenset(exclusions)
    kept: dict[tuple[str, str], TaskExecutionEvent] = {}
    kept_get = kept.get
    duplicates = 0
    for event in events:
        volunteer_id, task_id, project_id, timestamp = event
        if not volunteer_id or not task_id or not project_id:
            raise ValueError(f"event with empty id field: {event!r}")
        if project_id in excluded:
            continue
        key = (volunteer_id, task_id)
        prior = kept_get(key)
        if prior is None:
            kept[key] = event
        else:
            duplicates += 1
            if (timestamp, project_id) < (prior.timestamp, prior.project_id):
                kept[key] = event
    if not kept:
        raise EmptyDatasetError("no events survive exclusion filtering")

    # C-level key: (timestamp, volunteer_id, task_id) by field position
    ordered = sorted(kept.values(), key=itemgetter(3, 0, 1))
    latest = ordered[-1].timestamp
    if observation_end is None:
        observation_end = latest
    elif latest > observation_end:
        offender = next(e for e in ordered if e.timestamp > observation_end)
        raise EventAfterObservationEndError(
            f"event {offender.task_id!r} at {offender.timestamp.isoformat()} "
            f"is after observation end {observation_end.isoformat()}"
        )
    return PlatformSnapshot(
        events=tuple(ordered),
        observation_end=observation_end,
        excluded_projects=excluded,
        duplicates_removed=duplicates,
    )


def derive_profiles(
    snapshot: PlatformSnapshot,
    registration_dates: Mapping[str, datetime] | None = None,
) -> tuple[dict[str, VolunteerProfile], dict[str, ProjectProfile]]:
    """Derive volunteer and project profiles from a snapshot.

    A volunteer's first project is the project of their earliest event; ties
    on the timestamp are broken by the smallest task_id, which the snapshot's
    sort order provides for free. Recruitment attribution follows from that:
    a volunteer is recruited by their first project and inherited by every
    other project they contributed to.

    A volunteer's join instant defaults to their first event, the only proxy
    a task log offers. ``registration_dates`` overrides it per volunteer for
    platforms that export account-creation dates; an override may not
    postdate the volunteer's first event, and ids without events are ignored.

    Pure function of its inputs: repeated runs produce identical profiles.

    Raises:
        ValueError: a registration override postdates the first event.
    """
    # Hot path: flat accumulators instead of profile objects, one shared date
    # per calendar day so set hashing reuses the cached hash.
    # record layout: [join, last, active_days, days_by_project, count_by_project, first_project]
    records: dict[str, list] = {}
    records_get = records.get
    day_for: dict[int, date] = {}
    day_for_get = day_for.get
    project_first: dict[str, datetime] = {}
    project_last: dict[str, datetime] = {}
    for volunteer_id, _task_id, project_id, timestamp in snapshot.events:
        ordinal = timestamp.toordinal()
        day = day_for_get(ordinal)
        if day is None:
            day_for[ordinal] = day = timestamp.date()
        record = records_get(volunteer_id)
        if record is None:
            # first event in snapshot order == earliest event for the volunteer
            records[volunteer_id] = [
                timestamp,
                timestamp,
                {day},
                {project_id: {day}},
                {project_id: 1},
                project_id,
            ]
        else:
            record[1] = timestamp
            record[2].add(day)
            days_by_project = record[3]
            days = days_by_project.get(project_id)
            if days is None:
                days_by_project[project_id] = {day}
            else:
                days.add(day)
            counts = record[4]
            counts[project_id] = counts.get(project_id, 0) + 1
        project_last[project_id] = timestamp
        if project_id not in project_first:
            project_first[project_id] = timestamp

    volunteers: dict[str, VolunteerProfile] = {}
    task_totals: dict[str, int] = {pid: 0 for pid in project_first}
    recruited: dict[str, set[str]] = {pid: set() for pid in project_first}
    inherited: dict[str, set[str]] = {pid: set() for pid in project_first}
    for volunteer_id, record in records.items():
        first_project = record[5]
        for project_id, count in record[4].items():
            task_totals[project_id] += count
            if project_id == first_project:
                recruited[project_id].add(volunteer_id)
            else:
                inherited[project_id].add(volunteer_id)
        join_instant = record[0]
        if registration_dates:
            override = registration_dates.get(volunteer_id)
            if override is not None:
                if override > join_instant:
                    raise ValueError(
                        f"registration date for {volunteer_id!r} postdates their first event"
                    )
                join_instant = override
        volunteers[volunteer_id] = VolunteerProfile(
            volunteer_id=volunteer_id,
            join_instant=join_instant,
            last_instant=record[1],
            active_days=record[2],
            per_project_active_days=record[3],
            per_project_task_count=record[4],
            first_project=first_project,
        )

    projects = {
        project_id: ProjectProfile(
            project_id=project_id,
            first_event=first_event,
            last_event=project_last[project_id],
            volunteers=recruited[project_id] | inherited[project_id],
            task_count=task_totals[project_id],
            recruited=recruited[project_id],
            inherited=inherited[project_id],
        )
        for project_id, first_event in project_first.items()
    }
    return volunteers, projects
