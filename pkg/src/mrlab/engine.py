"""Deterministic in-process MapReduce executor.

A job is mapper -> (optional combiner) -> hash partition -> sorted shuffle
-> reducer.  Tasks never share mutable state; per-task input-record counts
are merged after completion, so the same job gives byte-identical output
and identical cost counters at any worker count.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import groupby
from typing import Any, Callable, Optional, Sequence

KeyValue = tuple[Any, Any]


class TaskError(Exception):
    """A mapper/combiner/reducer raised; carries the failing task id."""

    def __init__(self, task_id: str, cause: BaseException):
        super().__init__(f"task {task_id} failed: {cause!r}")
        self.task_id = task_id


@dataclass
class Split:
    """One map task's worth of input records."""

    split_id: int
    records: list[KeyValue]

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class JobSpec:
    """User code for one job.

    mapper(record, context) -> iterable of (key, value)
    combiner(key, values) -> iterable of (key, value), optional; must give
        the same reducer output whether run 0, 1 or many times on any
        partition of a key's values
    reducer(key, values, context) -> iterable of (key, value); None makes
        the job map-only
    sort_key orders keys in the shuffle (default: the key itself)
    """

    mapper: Callable[[KeyValue, Any], Any]
    reducer: Optional[Callable[[Any, list, Any], Any]] = None
    combiner: Optional[Callable[[Any, list], Any]] = None
    num_reducers: int = 1
    sort_key: Callable[[Any], Any] = lambda k: k

    def __post_init__(self):
        if self.num_reducers < 1:
            raise ValueError("num_reducers must be >= 1")


@dataclass
class CostCounters:
    """Input-record counts per task; total is the job's communication cost."""

    map_input_records: list[int] = field(default_factory=list)
    reduce_input_records: list[int] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.map_input_records) + sum(self.reduce_input_records)


@dataclass
class JobResult:
    output: list[KeyValue]
    counters: CostCounters
    # one output list per reduce task; None for map-only jobs
    reducer_outputs: Optional[list[list[KeyValue]]] = None


def make_splits(records: Sequence[KeyValue], split_size: int) -> list[Split]:
    """Chunk records into ceil(n/split_size) splits, order preserved."""
    if split_size < 1:
        raise ValueError("split_size must be >= 1")
    return [
        Split(i, list(records[off : off + split_size]))
        for i, off in enumerate(range(0, len(records), split_size))
    ]


def partition_for(key: Any, num_reducers: int) -> int:
    """Fixed partitioner: CRC32 of the key's repr, mod the reducer count.

    repr() is stable for the str/int/tuple keys jobs use here, which keeps
    partition assignment identical across runs and interpreters.
    """
    return zlib.crc32(repr(key).encode("utf-8")) % num_reducers


def _run_tasks(tasks, fn, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _group_sorted(pairs: list[KeyValue], sort_key) -> list[tuple[Any, list]]:
    ordered = sorted(pairs, key=lambda kv: sort_key(kv[0]))
    return [(k, [v for _, v in grp]) for k, grp in groupby(ordered, key=lambda kv: kv[0])]


def run_job(spec: JobSpec, splits: Sequence[Split], context: Any = None,
            workers: int = 1) -> JobResult:
    """Execute one MapReduce job over the given splits.

    The shuffle is a stable sort by key followed by grouping; each key's
    values reach exactly one reducer.  Output order is (reduce partition,
    sorted key) for map+reduce jobs and split order for map-only jobs.
    """
    counters = CostCounters()

    def map_task(split: Split) -> list[KeyValue]:
        task_id = f"map-{split.split_id}"
        try:
            out: list[KeyValue] = []
            for record in split.records:
                out.extend(spec.mapper(record, context))
            if spec.combiner is not None and spec.reducer is not None:
                combined: list[KeyValue] = []
                for key, values in _group_sorted(out, spec.sort_key):
                    combined.extend(spec.combiner(key, values))
                out = combined
            return out
        except TaskError:
            raise
        except Exception as exc:
            raise TaskError(task_id, exc) from exc

    map_outputs = _run_tasks(list(splits), map_task, workers)
    counters.map_input_records = [len(s) for s in splits]

    if spec.reducer is None:
        output = [kv for out in map_outputs for kv in out]
        return JobResult(output=output, counters=counters)

    partitions: list[list[KeyValue]] = [[] for _ in range(spec.num_reducers)]
    for out in map_outputs:  # task order keeps value lists deterministic
        for key, value in out:
            partitions[partition_for(key, spec.num_reducers)].append((key, value))

    def reduce_task(part_id: int) -> list[KeyValue]:
        task_id = f"reduce-{part_id}"
        try:
            out: list[KeyValue] = []
            for key, values in _group_sorted(partitions[part_id], spec.sort_key):
                out.extend(spec.reducer(key, values, context))
            return out
        except TaskError:
            raise
        except Exception as exc:
            raise TaskError(task_id, exc) from exc

    reducer_outputs = _run_tasks(list(range(spec.num_reducers)), reduce_task, workers)
    counters.reduce_input_records = [len(p) for p in partitions]

    output = [kv for out in reducer_outputs for kv in out]
    return JobResult(output=output, counters=counters, reducer_outputs=reducer_outputs)
