import logging

from src.bench import BenchmarkRunner, RunSpec, records_to_frame
from src.ground_sets import Graph, ShortestPathGroundSet, selection_ground_set
from src.instance_model import BudgetedInstance, cost_of_tuple
from src.minmax_baseline import solve_minmax
from src.run_logger import RunLogger

# Set up logging
logging.basicConfig(level=logging.WARNING)
logger = logging.getLogger(__name__)


def small_instances():
    """Two hand-sized instances with known optima"""
    selection = BudgetedInstance([1, 2, 3, 4], [4, 3, 2, 1], 1, selection_ground_set(4, 2))
    graph = Graph(4, ((0, 1), (1, 3), (0, 2), (2, 3)), 0, 3)
    paths = BudgetedInstance([1, 1, 2, 2], [1, 1, 0, 0], 1, ShortestPathGroundSet(graph))
    return {'choose-2-of-4': selection, 'two-paths': paths}


def show_instance(name, inst):
    print(f"\n📦 Instance: {name}")
    print(f"   Items: {inst.n}, budget Gamma = {inst.gamma:g}")
    print(f"   Nominal costs: {inst.c_hat.tolist()}")
    print(f"   Deviations:    {inst.d.tolist()}")
    minmax = solve_minmax(inst)
    print(f"   Min-max optimum: {minmax.value:g} with items {minmax.solution.items().tolist()}")
    print(minmax.to_frame().to_string(index=False))


def run_demo():
    print("🚀 Starting Min-Max-Min Robust Optimization Demo")
    print("------------------------------------------------")

    instances = small_instances()
    for name, inst in instances.items():
        show_instance(name, inst)

    print("\n🔍 Solving with every algorithm (k = 2)...")
    run_logger = RunLogger(name="demo")
    runner = BenchmarkRunner(threads=1)
    records = []
    for name, inst in instances.items():
        for algo in ('minmax', 'heur', 'bb2', 'it', 'brute'):
            spec = RunSpec(algo, k=1 if algo == 'minmax' else 2, time_limit=60)
            record = runner.run_cell(name, inst, spec, run_logger=run_logger)
            records.append(record)
            if record.solved == 'error':
                print(f"❌ {name}/{algo}: {record.error}")
                continue
            _, scenario = cost_of_tuple(inst, record.witness)
            print(f"\n✅ {name}/{algo}: {record.value:g} ({record.time_ms} ms)")
            for j, x in enumerate(record.witness, 1):
                print(f"   {j}. items {x.items().tolist()} nominal {x.nominal:g}")
            print(f"   Worst scenario z = {scenario.z.round(4).tolist()}")

    frame = records_to_frame(records)
    run_logger.log_result({'cells': len(records)})
    print("\n📊 Results:")
    print(frame.to_string(index=False))
    print("\n" + run_logger.get_run_summary())
    run_logger.close()


if __name__ == "__main__":
    run_demo()
