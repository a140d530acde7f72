import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from config.config import BENCH_TIME_LIMIT, IT_DEFAULT_Q, KADAPT_THREADS, LOG_LEVEL
from src.bench import ALGORITHMS, BenchmarkRunner, RunSpec, aggregate, records_to_frame, write_report
from src.errors import KAdaptError
from src.generator import generate_instance, generate_selection_instance
from src.ground_sets import ENUMERATORS
from src.instance_io import load_instance, save_instance
from src.run_logger import RunLogger

# Set up logging
logging.basicConfig(level=LOG_LEVEL, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def build_parser():
    parser = argparse.ArgumentParser(prog='kadapt', description='Min-max-min robust optimization with budgeted uncertainty')
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('generate', help='Generate a random instance file')
    gen.add_argument('--nodes', type=int, default=20)
    gen.add_argument('--selection', type=int, nargs=2, metavar=('N', 'P'),
                     help='Generate a choose-P-of-N instance instead of a graph')
    gen.add_argument('--gamma', type=float, default=3.0)
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--out', required=True)

    def add_solver_flags(p, multiple=False):
        if multiple:
            p.add_argument('--algo', choices=ALGORITHMS, nargs='+', default=['it'])
            p.add_argument('--k', type=int, nargs='+', default=[2])
        else:
            p.add_argument('--algo', choices=ALGORITHMS, default='it')
            p.add_argument('--k', type=int, default=2)
        p.add_argument('--gamma', type=float, default=None, help='Override the instance budget')
        p.add_argument('--q', type=int, default=IT_DEFAULT_Q)
        p.add_argument('--time-limit', type=float, default=BENCH_TIME_LIMIT)
        p.add_argument('--enumerator', choices=ENUMERATORS, default='dfs')
        p.add_argument('--seed', type=int, default=0,
                       help='Seeds the heuristic start weights; 0 keeps the default start')

    solve = sub.add_parser('solve', help='Solve one instance')
    solve.add_argument('instance')
    add_solver_flags(solve)
    solve.add_argument('--log-dir', default=None, help='Write a JSON/text trace of the run here')

    bench = sub.add_parser('bench', help='Run an algorithm grid over instances')
    bench.add_argument('instances', nargs='*', help='Instance files')
    bench.add_argument('--generate', type=int, nargs=2, metavar=('NODES', 'COUNT'),
                       help='Generate COUNT instances with NODES nodes (seeds from --seed)')
    add_solver_flags(bench, multiple=True)
    bench.add_argument('--threads', type=int, default=KADAPT_THREADS)
    bench.add_argument('--out', required=True)
    bench.add_argument('--summary', default=None, help='Also write the aggregated table here')

    oracle = sub.add_parser('oracle', help='Compare an algorithm with brute force')
    oracle.add_argument('instance')
    add_solver_flags(oracle)
    return parser


def _spec(args, algo, k):
    return RunSpec(algo, k, args.gamma, args.time_limit, args.seed, args.enumerator, args.q).validate()


def cmd_generate(args):
    if args.selection:
        n, p = args.selection
        inst = generate_selection_instance(n, p, args.gamma, args.seed)
    else:
        inst = generate_instance(args.nodes, args.gamma, args.seed)
    save_instance(inst, args.out)
    logger.info(f"Wrote instance with n={inst.n} to {args.out}")
    return 0


def cmd_solve(args):
    inst = load_instance(args.instance)
    spec = _spec(args, args.algo, args.k)
    run_logger = RunLogger(args.log_dir, name=f"{args.algo}_k{args.k}") if args.log_dir else None
    if run_logger:
        run_logger.log_spec({'instance': args.instance, **asdict(spec)})
    record = BenchmarkRunner(threads=1).run_cell(Path(args.instance).stem, inst, spec, run_logger=run_logger)
    if run_logger:
        run_logger.log_result(record.to_row())
        run_logger.save_summary()
        run_logger.close()
    if record.solved == 'error':
        logger.error(record.error)
        return 1
    print(f"value={record.value:.6f} solved={record.solved} time_ms={record.time_ms} cost_red={record.cost_red:.4f}")
    for j, x in enumerate(record.witness):
        print(f"  member {j + 1}: items {x.items().tolist()} nominal {x.nominal:g}")
    return 0


def cmd_bench(args):
    instances = {}
    for path in args.instances:
        instances[Path(path).stem] = load_instance(path)
    if args.generate:
        nodes, count = args.generate
        gamma = 3.0 if args.gamma is None else args.gamma
        for i in range(count):
            instances[f"v{nodes}_s{args.seed + i}"] = generate_instance(nodes, gamma, args.seed + i)
    specs = [_spec(args, algo, k) for algo in args.algo for k in args.k
             if not (algo == 'bb2' and k != 2) and not (algo == 'it' and k not in (2, 3))]
    records = BenchmarkRunner(threads=args.threads).run_matrix(instances, specs)
    write_report(records, args.out)
    logger.info(f"Wrote {len(records)} records to {args.out}")
    if args.summary:
        aggregate(records_to_frame(records), args.time_limit).to_csv(args.summary, index=False)
    return 2 if any(r.solved == 'error' for r in records) else 0


def cmd_oracle(args):
    inst = load_instance(args.instance)
    runner = BenchmarkRunner(threads=1)
    name = Path(args.instance).stem
    record = runner.run_cell(name, inst, _spec(args, args.algo, args.k))
    exact = runner.run_cell(name, inst, _spec(args, 'brute', args.k))
    for r in (record, exact):
        if r.solved == 'error':
            logger.error(r.error)
            return 1
    diff = record.value - exact.value
    print(f"{args.algo}={record.value:.6f} brute={exact.value:.6f} difference={diff:.3e}")
    return 0


COMMANDS = {'generate': cmd_generate, 'solve': cmd_solve, 'bench': cmd_bench, 'oracle': cmd_oracle}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (KAdaptError, OSError, ValueError, KeyError) as e:
        logger.error(f"Error running {args.command}: {e}")
        return 1


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Interrupted")
        sys.exit(1)
