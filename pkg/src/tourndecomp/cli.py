"""Command-line entry point: ``tourndecomp verify|pn|classify|expander|decompose``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .digraph import FormatError, load_digraph
from .exceptional import classify
from .excess import excess_profile
from .expander import RobustParams, expansion_failure, EXPANDER_CAP
from .pipeline import PipelineConfig, decompose
from .solver import DEFAULT_BUDGET, pn_exact
from .verify import VerifyConfig, run_verify


def _n_range(text: str) -> tuple[int, ...]:
    try:
        if '-' in text:
            lo, hi = (int(x) for x in text.split('-', 1))
        else:
            lo = hi = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f'bad vertex count {text!r}') from exc
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f'bad vertex count range {text!r}')
    return tuple(range(lo, hi + 1))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog='tourndecomp', description='Path decompositions of tournaments.')
    sub = p.add_subparsers(dest='command', required=True)

    v = sub.add_parser('verify', help='compute pn for many tournaments and check the texc bounds')
    v.add_argument('--n', type=_n_range, required=True, help='vertex count N or range LO-HI')
    mode = v.add_mutually_exclusive_group(required=True)
    mode.add_argument('--all', action='store_true', help='every labelled tournament')
    mode.add_argument('--sample', type=int, metavar='K', help='K distinct random tournaments per n')
    v.add_argument('--seed', type=int, default=0)
    v.add_argument('--strategy', choices=('exact', 'pipeline', 'both'), default='exact')
    v.add_argument('--out', required=True, metavar='PATH')
    v.add_argument('--resume', action='store_true')
    v.add_argument('--budget', type=int, default=DEFAULT_BUDGET, metavar='NODES')
    v.add_argument('--pipeline-budget', type=int, default=200_000, metavar='NODES')
    v.add_argument('--trace', action='store_true', help='store the pipeline stage trace per record')
    v.add_argument('--wall-time', action='store_true', help='also record seconds (breaks byte-identical reruns)')
    v.add_argument('--jobs', type=int, default=1)

    q = sub.add_parser('pn', help='exact path number of a digraph')
    q.add_argument('file')
    q.add_argument('--budget', type=int, default=DEFAULT_BUDGET)
    q.add_argument('--json', action='store_true')

    c = sub.add_parser('classify', help='Regular / Apex / Generic')
    c.add_argument('file')

    e = sub.add_parser('expander', help='exhaustive robust outexpansion check')
    e.add_argument('file')
    e.add_argument('--nu', required=True, help='rational p/q')
    e.add_argument('--tau', required=True, help='rational p/q')
    e.add_argument('--cap', type=int, default=EXPANDER_CAP)

    d = sub.add_parser('decompose', help='a path decomposition of a tournament')
    d.add_argument('file')
    d.add_argument('--strategy', choices=('exact', 'pipeline'), default='pipeline')
    d.add_argument('--budget', type=int, default=200_000, help='pipeline node budget')
    d.add_argument('--seed', type=int, default=0)
    d.add_argument('--trace', action='store_true')
    return p


def _cmd_verify(args) -> int:
    cfg = VerifyConfig(args.n, 'all' if args.all else 'sample', args.sample or 0, args.seed, args.strategy,
                       args.out, args.resume, args.budget, args.pipeline_budget, args.trace, args.wall_time,
                       args.jobs)
    records, summary = run_verify(cfg)
    print(f'{summary["records"]} records written to {args.out}')
    for key, hist in summary['gap_histogram'].items():
        print(f'  {key}: gaps {hist}')
    if summary['pipeline_compared']:
        print(f'  pipeline == exact on {summary["pipeline_equal_exact"]}/{summary["pipeline_compared"]}')
    if summary['violations']:
        print('VIOLATIONS: ' + '; '.join(summary['violations']), file=sys.stderr)
        return 1
    return 0


def _cmd_pn(args) -> int:
    D = load_digraph(args.file)
    res = pn_exact(D, budget=args.budget)
    if args.json:
        print(json.dumps(res.to_dict()))
    else:
        prof = excess_profile(D)
        flag = '' if res.optimal else ' (budget exhausted, upper bound)'
        print(f'pn = {res.pn}{flag}')
        print(f'texc = {prof.texc} (exc = {prof.exc_total}, max semidegree = {prof.delta0})')
        for path in res.certificate:
            print(' '.join(map(str, path)))
    return 0


def _cmd_classify(args) -> int:
    T = load_digraph(args.file)
    cls = classify(T)
    print(cls.kind if cls.witness is None else f'{cls.kind} v+={cls.witness[0]} v-={cls.witness[1]}')
    return 0


def _cmd_expander(args) -> int:
    D = load_digraph(args.file)
    bad = expansion_failure(D, RobustParams(args.nu, args.tau), cap=args.cap)
    if bad is None:
        print('robust outexpander: yes')
    else:
        print(f'robust outexpander: no (fails at S = {sorted(bad)})')
    return 0


def _cmd_decompose(args) -> int:
    T = load_digraph(args.file)
    if args.strategy == 'exact':
        res = pn_exact(T)
        out = {'size': res.pn, 'optimal': res.optimal, 'paths': [list(p) for p in res.certificate]}
    else:
        result = decompose(T, PipelineConfig(budget=args.budget, seed=args.seed))
        out = result.to_dict()
        if not args.trace:
            del out['trace']
    print(json.dumps(out))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    handler = {'verify': _cmd_verify, 'pn': _cmd_pn, 'classify': _cmd_classify,
               'expander': _cmd_expander, 'decompose': _cmd_decompose}[args.command]
    try:
        return handler(args)
    except (FormatError, OSError, ValueError) as exc:
        print(f'tourndecomp: error: {exc}', file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
