"""
Command line front end.

    pc-lab eval QUERY INSTANCE
    pc-lab check pc QUERY POLICY
    pc-lab check pci QUERY INSTANCE POLICY [--mode single|hereditary]
    pc-lab check transfer|c3|hypercube-pc QUERY QUERY_PRIME
    pc-lab check strongmin|minimize QUERY
    pc-lab gen NAME INPUT OUT_DIR
    pc-lab simulate QUERY POLICY [INSTANCE] [--random BUDGET] [--exhaustive]

Exit codes: 0 when the checked property holds, 1 when it fails, 2 on usage and input errors.
"""
import argparse
import io
import json
import logging
import os
import sys
from typing import Callable, Dict, List, Tuple

from pclab.configuration import Configuration
from pclab.evaluation import ENGINES, check_schema, evaluator_for
from pclab.formulas import brute_force_qbf, brute_force_sat, formula_from_file
from pclab.parallel_correctness import PCI_MODES, is_parallel_correct, is_parallel_correct_on_instance
from pclab.policy import DistributionPolicy
from pclab.query import ConjunctiveQuery, Instance, apply_valuation
from pclab.reductions import (brute_force_3col, graph_from_file, reduce_3col_to_c3_variant1,
                              reduce_3col_to_c3_variant2, reduce_3sat_to_strongmin, reduce_pi2qbf_to_pc,
                              reduce_pi2qbf_to_pci, reduce_pi3qbf_to_transfer)
from pclab.simulator import exhaustive_counterexample, one_round_evaluate, search_counterexample
from pclab.transfer import check_c3, hypercube_family_pc, transfers
from pclab.valuations import is_strongly_minimal, minimize_cq
from pclab.workspace import Workspace

logger = logging.getLogger(__name__)

HOLDS, FAILS, USAGE = 0, 1, 2


class Report:
    """ Output of one command, written to stdout in one piece when the command ends """

    def __init__(self, configuration: Configuration):
        self.configuration = configuration
        self.buffer = io.StringIO()
        self.data = {}

    @property
    def json(self) -> bool:
        return self.configuration.output_format == 'json'

    def line(self, text: str = ''):
        self.buffer.write(text + '\n')

    def lines(self, items):
        for item in items:
            self.line(str(item))

    def emit(self, stream):
        if self.json:
            stream.write(json.dumps(self.data, indent=2, sort_keys=True) + '\n')
        else:
            stream.write(self.buffer.getvalue())
        stream.flush()


def _configuration(args) -> Configuration:
    return Configuration(seed=args.seed,
                         budget=args.budget,
                         allow_skip=args.allow_skip == 'true',
                         evaluator=args.engine,
                         workers=args.workers,
                         oracle_cap=args.oracle_cap,
                         output_format=args.format)


def _verdict(report: Report, holds: bool) -> int:
    report.line('HOLDS' if holds else 'FAILS')
    report.data['holds'] = holds
    return HOLDS if holds else FAILS


def _write_witness(args, files: Dict[str, str]):
    if not args.witness_dir:
        return
    os.makedirs(args.witness_dir, exist_ok=True)
    for name, text in files.items():
        path = os.path.join(args.witness_dir, name)
        with open(path, 'w') as file:
            file.write(text)
        logger.info(f"Wrote {path}")


def _instance_lines(report: Report, title: str, i: Instance):
    report.line(f'{title}:')
    report.lines(f'  {f}' for f in i)


def cmd_eval(args, report: Report) -> int:
    workspace = Workspace()
    q = workspace.load_query(args.query)
    i = workspace.load_instance(args.instance)
    workspace.validate()
    check_schema(q, i)
    result = evaluator_for(report.configuration).evaluate(q, i)
    report.lines(result)
    report.line(f'-- {len(result)} facts')
    report.data.update({'facts': [str(f) for f in result], 'count': len(result)})
    return HOLDS


def _pc_failure(args, report: Report, verdict, p: DistributionPolicy):
    valuation, instance = verdict.witness
    report.line(f'valuation {valuation}')
    _instance_lines(report, 'instance', instance)
    _write_witness(args, {'policy.pol': p.to_text(), 'instance.facts': instance.to_text()})


def check_pc(args, report: Report) -> int:
    workspace = Workspace()
    q = workspace.load_query(args.query)
    p = workspace.load_policy(args.policy)
    workspace.validate()
    verdict = is_parallel_correct(q, p)
    report.data.update(verdict.to_json())
    code = _verdict(report, verdict.holds)
    if not verdict:
        _pc_failure(args, report, verdict, p)
    return code


def check_pci(args, report: Report) -> int:
    workspace = Workspace()
    q = workspace.load_query(args.query)
    i = workspace.load_instance(args.instance)
    p = workspace.load_policy(args.policy)
    workspace.validate()
    verdict = is_parallel_correct_on_instance(q, i, p, args.mode, report.configuration)
    report.data.update(verdict.to_json())
    code = _verdict(report, verdict.holds)
    if not verdict:
        _pc_failure(args, report, verdict, p)
    return code


def _pair(args) -> Tuple[ConjunctiveQuery, ConjunctiveQuery]:
    workspace = Workspace()
    q = workspace.load_query(args.query)
    q_prime = workspace.load_query(args.query_prime)
    workspace.validate()
    return q, q_prime


def _certificate_lines(report: Report, certificate):
    report.line(f'theta {certificate.theta}')
    report.line(f'rho {certificate.rho}')


def check_transfer(args, report: Report) -> int:
    q, q_prime = _pair(args)
    verdict = transfers(q, q_prime, configuration=report.configuration)
    report.data.update(verdict.to_json())
    code = _verdict(report, verdict.holds)
    if verdict.certificate is not None:
        _certificate_lines(report, verdict.certificate)
    if not verdict:
        _, required = apply_valuation(verdict.c2_witness, q_prime)
        instance = Instance(required)
        report.line(f'valuation {verdict.c2_witness}')
        report.line('policy:')
        report.lines(f'  {line}' for line in verdict.policy_witness.to_text().splitlines())
        _instance_lines(report, 'instance', instance)
        _write_witness(args, {'policy.pol': verdict.policy_witness.to_text(), 'instance.facts': instance.to_text()})
    return code


def check_certificate(args, report: Report) -> int:
    q, q_prime = _pair(args)
    certificate = check_c3(q, q_prime)
    code = _verdict(report, certificate is not None)
    if certificate is not None:
        _certificate_lines(report, certificate)
        report.data['certificate'] = certificate.to_json()
    return code


def check_strongmin(args, report: Report) -> int:
    q = Workspace().load_query(args.query)
    holds, witness = is_strongly_minimal(q)
    code = _verdict(report, holds)
    if witness is not None:
        report.line(f'smaller {witness.smaller}')
        report.line(f'larger {witness.larger}')
        report.data['witness'] = witness.to_json()
    return code


def check_minimize(args, report: Report) -> int:
    """ Prints the core; the property checked is that the query is already minimal """
    q = Workspace().load_query(args.query)
    core, theta = minimize_cq(q)
    code = _verdict(report, len(core.body_set) == len(q.body_set))
    report.line(f'core {core}')
    report.line(f'folding {theta}')
    report.data.update({'core': str(core), 'folding': theta.to_json()})
    return code


def check_hypercube(args, report: Report) -> int:
    q, q_prime = _pair(args)
    verdict = hypercube_family_pc(q, q_prime)
    report.data.update(verdict.to_json())
    code = _verdict(report, verdict.holds)
    if verdict.certificate is not None:
        _certificate_lines(report, verdict.certificate)
    else:
        report.line('policy:')
        report.lines(f'  {line}' for line in verdict.policy.to_text().splitlines())
        _instance_lines(report, 'instance', verdict.instance)
        _write_witness(args, {'policy.pol': verdict.policy.to_text(), 'instance.facts': verdict.instance.to_text()})
    return code


CHECKS: Dict[str, Callable] = {
    'pc': check_pc,
    'pci': check_pci,
    'transfer': check_transfer,
    'c3': check_certificate,
    'strongmin': check_strongmin,
    'minimize': check_minimize,
    'hypercube-pc': check_hypercube,
}


def _generate(name: str, input_path: str, full_head: bool, cap: int) -> Tuple[Dict[str, object], bool]:
    """ The artifacts of a construction, keyed by file name, and the expected verdict """
    if name in ('3col-c3', '3col-c3-v2'):
        g = graph_from_file(input_path)
        construct = reduce_3col_to_c3_variant1 if name == '3col-c3' else reduce_3col_to_c3_variant2
        q, q_prime = construct(g, full_head=full_head)
        return {'q.cq': q, 'qprime.cq': q_prime}, brute_force_3col(g, cap)
    phi = formula_from_file(input_path)
    if name == 'pi2-pci':
        q, i, p = reduce_pi2qbf_to_pci(phi)
        return {'q.cq': q, 'i.facts': i, 'policy.pol': p}, brute_force_qbf(phi, cap)
    if name == 'pi2-pc':
        q, p = reduce_pi2qbf_to_pc(phi)
        return {'q.cq': q, 'policy.pol': p}, brute_force_qbf(phi, cap)
    if name == 'pi3-transfer':
        q, q_prime = reduce_pi3qbf_to_transfer(phi)
        return {'q.cq': q, 'qprime.cq': q_prime}, brute_force_qbf(phi, cap)
    q = reduce_3sat_to_strongmin(phi)
    return {'q.cq': q}, not brute_force_sat(phi, cap)


GENERATORS = ('pi2-pci', 'pi2-pc', 'pi3-transfer', '3sat-strongmin', '3col-c3', '3col-c3-v2')


def cmd_gen(args, report: Report) -> int:
    artifacts, expected = _generate(args.reduction, args.input, args.full_head, report.configuration.oracle_cap)
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    for file_name, artifact in artifacts.items():
        path = os.path.join(args.out_dir, file_name)
        artifact.save(path)
        written.append(path)
    path = os.path.join(args.out_dir, 'expected')
    with open(path, 'w') as file:
        file.write('yes\n' if expected else 'no\n')
    written.append(path)
    logger.info(f"Generated {args.reduction} vectors in {args.out_dir}")
    report.lines(written)
    report.line(f'expected {"yes" if expected else "no"}')
    report.data.update({'files': written, 'expected': expected})
    return HOLDS


def cmd_simulate(args, report: Report) -> int:
    configuration = report.configuration
    workspace = Workspace()
    q = workspace.load_query(args.query)
    p = workspace.load_policy(args.policy)
    if args.instance:
        i = workspace.load_instance(args.instance)
    workspace.validate()

    if args.instance:
        instance = i
    else:
        if args.random is not None:
            instance = search_counterexample(q, p, budget=args.random, configuration=configuration)
            searched = f'{args.random} random instances'
        elif args.exhaustive:
            instance = exhaustive_counterexample(q, p, configuration=configuration)
            searched = 'every subinstance'
        else:
            raise ValueError("Give an instance, --random BUDGET or --exhaustive")
        if instance is None:
            report.line(f'NO COUNTEREXAMPLE in {searched}')
            report.data['counterexample'] = None
            return HOLDS
        _instance_lines(report, 'counterexample', instance)
        report.data['counterexample'] = [str(f) for f in instance]

    run = one_round_evaluate(q, p, instance, configuration)
    report.buffer.write(run.to_text())
    report.data.update(run.to_json())
    if args.csv:
        run.to_data_frame().to_csv(args.csv, index=False)
    if not run.equal:
        _write_witness(args, {'policy.pol': p.to_text(), 'instance.facts': instance.to_text()})
    return HOLDS if run.equal else FAILS


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=['text', 'json'], default='text', help='report format')
    common.add_argument('--seed', type=int, default=0, help='seed for randomized search')
    common.add_argument('--budget', type=int, default=1000, help='random instances tried per search')
    common.add_argument('--allow-skip', choices=['true', 'false'], default='true',
                        help='whether witness policies may skip facts')
    common.add_argument('--engine', choices=sorted(ENGINES), default='backtrack', help='query evaluator')
    common.add_argument('--workers', type=int, default=1, help='threads evaluating node chunks')
    common.add_argument('--oracle-cap', type=int, default=16, help='largest oracle input')
    common.add_argument('--witness-dir', help='directory receiving witness policy and instance files')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog='pc-lab',
                                     description='Parallel-correctness and transfer analysis of conjunctive queries')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', '-v', action='store_true', help='log progress on stderr')
    verbosity.add_argument('--quiet', '-q', action='store_true', help='log errors only')
    commands = parser.add_subparsers(dest='command', required=True)

    evaluate = commands.add_parser('eval', parents=[common], help='evaluate a query on an instance')
    evaluate.add_argument('query')
    evaluate.add_argument('instance')
    evaluate.set_defaults(handler=cmd_eval)

    check = commands.add_parser('check', help='decide a property')
    kinds = check.add_subparsers(dest='kind', required=True)
    pc = kinds.add_parser('pc', parents=[common], help='parallel-correctness under a policy')
    pc.add_argument('query')
    pc.add_argument('policy')
    pci = kinds.add_parser('pci', parents=[common], help='parallel-correctness on one instance')
    pci.add_argument('query')
    pci.add_argument('instance')
    pci.add_argument('policy')
    pci.add_argument('--mode', choices=PCI_MODES, default='single')
    for kind in ('transfer', 'c3', 'hypercube-pc'):
        pair = kinds.add_parser(kind, parents=[common])
        pair.add_argument('query')
        pair.add_argument('query_prime')
    for kind in ('strongmin', 'minimize'):
        kinds.add_parser(kind, parents=[common]).add_argument('query')
    for kind, handler in CHECKS.items():
        kinds.choices[kind].set_defaults(handler=handler)

    gen = commands.add_parser('gen', parents=[common], help='generate reduction test vectors')
    gen.add_argument('reduction', choices=GENERATORS)
    gen.add_argument('input')
    gen.add_argument('out_dir')
    gen.add_argument('--full-head', action='store_true', help='give the colouring queries a full head')
    gen.set_defaults(handler=cmd_gen)

    simulate = commands.add_parser('simulate', parents=[common], help='run one distributed round')
    simulate.add_argument('query')
    simulate.add_argument('policy')
    simulate.add_argument('instance', nargs='?')
    simulate.add_argument('--random', type=int, metavar='BUDGET', help='search random instances')
    simulate.add_argument('--exhaustive', action='store_true', help='try every subinstance of the policy facts')
    simulate.add_argument('--csv', help='write the per-node results to a CSV file')
    simulate.set_defaults(handler=cmd_simulate)
    return parser


def main(argv: List[str] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format='%(levelname)s %(name)s: %(message)s')
    try:
        report = Report(_configuration(args))
        code = args.handler(args, report)
    except (ValueError, OSError) as error:
        sys.stderr.write(f'pc-lab: {error}\n')
        return USAGE
    report.emit(sys.stdout)
    return code


if __name__ == '__main__':
    sys.exit(main())
