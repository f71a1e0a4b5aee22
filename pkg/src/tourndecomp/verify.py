"""
Batch verification: compute pn for many tournaments, compare with texc and
the exceptional classes, and write JSON Lines records plus a summary.

Records are sorted by encoding before writing and contain no wall-clock
data unless asked for, so identical configurations produce identical files.
"""

from __future__ import annotations

import json
import random
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path as FilePath
from typing import Iterable, Optional

from .digraph import Digraph, decode_hex, encode_hex, enumerate_tournaments, tournament_from_code, \
    tournament_pairs, validate_decomposition
from .exceptional import APEX, GENERIC, REGULAR, classify
from .excess import excess_profile
from .pipeline import PipelineConfig, decompose
from .solver import DEFAULT_BUDGET, pn_exact, pn_oracle

__all__ = ['VerifyConfig', 'VerifyRecord', 'verify_one', 'run_verify', 'summarize', 'ORACLE_CHECK_EDGES']

ORACLE_CHECK_EDGES = 15


@dataclass
class VerifyConfig:
    n_values: tuple
    mode: str = 'all'                  # 'all' or 'sample'
    sample: int = 0
    seed: int = 0
    strategy: str = 'exact'            # 'exact', 'pipeline' or 'both'
    out: Optional[str] = None
    resume: bool = False
    budget: int = DEFAULT_BUDGET
    pipeline_budget: int = 200_000
    trace: bool = False
    wall_time: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in ('all', 'sample'):
            raise ValueError('mode must be all or sample')
        if self.strategy not in ('exact', 'pipeline', 'both'):
            raise ValueError('strategy must be exact, pipeline or both')
        if self.mode == 'sample' and self.sample <= 0:
            raise ValueError('sample size must be positive')


@dataclass
class VerifyRecord:
    encoding: str
    n: int
    cls: str
    exc: int
    delta0: int
    texc: int
    n_plus: int
    n_minus: int
    pn_exact: Optional[int]
    exact_optimal: Optional[bool]
    pn_pipeline: Optional[int]
    gap: Optional[int]
    timings: dict
    fallback_stage: Optional[str] = None
    oracle: Optional[int] = None
    violations: list = field(default_factory=list)
    trace: Optional[list] = None

    def to_json(self) -> str:
        d = asdict(self)
        d['class'] = d.pop('cls')
        if d['trace'] is None:
            del d['trace']
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> 'VerifyRecord':
        d = json.loads(line)
        d['cls'] = d.pop('class')
        return cls(**d)


def _class_of(T: Digraph) -> str:
    if T.n < 3:
        return GENERIC
    return classify(T).kind


def verify_one(n: int, encoding: str, config: VerifyConfig) -> VerifyRecord:
    T = decode_hex(n, encoding)
    prof = excess_profile(T)
    kind = _class_of(T)
    timings: dict = {}
    violations = []
    pn = optimal = pipe = stage = oracle = None
    trace = None
    if config.strategy in ('exact', 'both'):
        t0 = time.perf_counter()
        res = pn_exact(T, budget=config.budget)
        if config.wall_time:
            timings['exact_seconds'] = round(time.perf_counter() - t0, 6)
        timings['exact_nodes'] = res.nodes_explored
        pn, optimal = res.pn, res.optimal
        if not validate_decomposition(T, res.certificate).ok:
            violations.append('invalid exact certificate')
        if T.num_edges <= ORACLE_CHECK_EDGES:
            oracle = pn_oracle(T)
            if optimal and oracle != pn:
                violations.append(f'solver {pn} != oracle {oracle}')
    if config.strategy in ('pipeline', 'both'):
        t0 = time.perf_counter()
        res = decompose(T, PipelineConfig(budget=config.pipeline_budget, fallback=config.strategy == 'pipeline',
                                          fallback_budget=config.budget))
        if config.wall_time:
            timings['pipeline_seconds'] = round(time.perf_counter() - t0, 6)
        stage = res.fallback_stage
        if res.paths or T.num_edges == 0:
            if not validate_decomposition(T, res.paths).ok:
                violations.append('invalid pipeline decomposition')
            pipe = len(res.paths)
        if config.trace:
            trace = res.trace
    # without the exact run, a pipeline answer of size texc (or an optimal fallback) is the path number
    value, known = pn, optimal
    if value is None and pipe is not None:
        value, known = pipe, stage is None or bool(res.optimal)
    gap = None if value is None else value - prof.texc
    if gap is not None:
        if gap < 0:
            violations.append('pn below texc')
        if kind in (REGULAR, APEX) and known and gap < 1:
            violations.append('exceptional tournament with pn = texc')
    if pipe is not None and pn is not None and optimal and pipe < pn:
        violations.append('pipeline beat the exact optimum')
    return VerifyRecord(encoding, n, kind, prof.exc_total, prof.delta0, prof.texc, prof.n_plus, prof.n_minus,
                        pn, optimal, pipe, gap,
                        timings, stage, oracle, violations, trace)


def _instances(config: VerifyConfig) -> list[tuple[int, str]]:
    out = []
    for n in config.n_values:
        if config.mode == 'all':
            out += [(n, encode_hex(T)) for T in enumerate_tournaments(n)]
            continue
        m = len(tournament_pairs(n))
        total = 1 << m
        rng = random.Random(f'{config.seed}:{n}')
        if config.sample >= total:
            codes = range(total)
        else:
            chosen: set = set()
            while len(chosen) < config.sample:
                chosen.add(rng.getrandbits(m) if m else 0)
            codes = sorted(chosen)
        out += [(n, encode_hex(tournament_from_code(n, c))) for c in codes]
    return out


def _work(args):
    n, enc, config = args
    return verify_one(n, enc, config)


def summarize(records: Iterable[VerifyRecord]) -> dict:
    records = list(records)
    gaps: dict = {}
    for r in records:
        key = f'{r.cls}/{"even" if r.n % 2 == 0 else "odd"}'
        gaps.setdefault(key, Counter())[str(r.gap)] += 1
    both = [r for r in records if r.pn_pipeline is not None and r.pn_exact is not None and r.exact_optimal]
    generic = [r for r in both if r.cls == GENERIC]
    fallback = Counter(r.fallback_stage for r in records if r.fallback_stage)
    return {
        'records': len(records),
        'gap_histogram': {k: dict(sorted(v.items())) for k, v in sorted(gaps.items())},
        'non_optimal': sum(1 for r in records if r.exact_optimal is False),
        'pipeline_equal_exact': sum(1 for r in both if r.pn_pipeline == r.pn_exact),
        'pipeline_compared': len(both),
        'pipeline_direct_success_generic': sum(1 for r in generic if r.fallback_stage is None),
        'generic_compared': len(generic),
        'fallback_stages': dict(sorted(fallback.items())),
        'violations': sorted({v for r in records for v in r.violations}),
        'violating_records': [r.encoding for r in records if r.violations],
    }


def run_verify(config: VerifyConfig) -> tuple[list[VerifyRecord], dict]:
    """Run the batch; with ``config.out`` set, write PATH (JSONL) and PATH.summary.json."""
    done: dict = {}
    if config.out and config.resume and FilePath(config.out).exists():
        for line in FilePath(config.out).read_text().splitlines():
            if line.strip():
                rec = VerifyRecord.from_json(line)
                done[(rec.n, rec.encoding)] = rec
    todo = [(n, e, config) for n, e in _instances(config) if (n, e) not in done]
    if config.jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            fresh = list(pool.map(_work, todo, chunksize=max(1, len(todo) // (8 * config.jobs))))
    else:
        fresh = [_work(t) for t in todo]
    wanted = set(_instances(config))
    records = [r for k, r in done.items() if k in wanted] + fresh
    records.sort(key=lambda r: (r.n, r.encoding))
    summary = summarize(records)
    summary['config'] = {k: v for k, v in asdict(config).items() if k not in ('out', 'resume', 'jobs')}
    summary['config']['n_values'] = list(config.n_values)
    if config.out:
        body = ''.join(r.to_json() + '\n' for r in records)
        FilePath(config.out).write_text(body)
        FilePath(config.out + '.summary.json').write_text(json.dumps(summary, indent=2, sort_keys=True) + '\n')
    return records, summary
