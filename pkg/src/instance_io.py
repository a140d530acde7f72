"""JSON instance files."""
import json
import logging
from pathlib import Path

from .errors import ArgumentError
from .ground_sets import Graph, LinearGroundSet, ShortestPathGroundSet
from .instance_model import BudgetedInstance

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def ground_to_dict(ground):
    if isinstance(ground, ShortestPathGroundSet):
        g = ground.graph
        return {
            'type': 'shortest_path',
            'vertices': g.num_vertices,
            'edges': [[u, v, index] for index, (u, v) in enumerate(g.edges)],
            's': g.s,
            't': g.t,
        }
    if isinstance(ground, LinearGroundSet):
        return {
            'type': 'linear',
            'rows': [
                {'coefs': [float(c) for c in row], 'sense': sense.value, 'rhs': float(rhs)}
                for row, sense, rhs in zip(ground.matrix, ground.senses, ground.rhs)
            ],
        }
    raise ArgumentError(f"Cannot serialize ground set of type {type(ground).__name__}")


def ground_from_dict(data, n):
    kind = data.get('type')
    if kind == 'shortest_path':
        edges = sorted(data['edges'], key=lambda e: e[2])
        if [e[2] for e in edges] != list(range(len(edges))):
            raise ArgumentError("Edge indices must be a permutation of 0..n-1")
        graph = Graph(int(data['vertices']), tuple((u, v) for u, v, _ in edges), int(data['s']), int(data['t']))
        return ShortestPathGroundSet(graph)
    if kind == 'linear':
        rows = data['rows']
        return LinearGroundSet(n, [r['coefs'] for r in rows], [r['sense'] for r in rows],
                               [r['rhs'] for r in rows])
    raise ArgumentError(f"Unknown ground set type '{kind}'")


def instance_to_dict(inst):
    return {
        'version': FORMAT_VERSION,
        'n': inst.n,
        'gamma': float(inst.gamma),
        'c_hat': [float(c) for c in inst.c_hat],
        'd': [float(v) for v in inst.d],
        'ground': ground_to_dict(inst.ground),
    }


def instance_from_dict(data):
    if data.get('version') != FORMAT_VERSION:
        raise ArgumentError(f"Unsupported instance format version {data.get('version')}")
    n = int(data['n'])
    ground = ground_from_dict(data['ground'], n)
    if ground.n != n:
        raise ArgumentError(f"Ground set has {ground.n} items but the file declares n={n}")
    return BudgetedInstance(data['c_hat'], data['d'], data['gamma'], ground)


def dumps(inst):
    return json.dumps(instance_to_dict(inst), indent=2, sort_keys=True) + '\n'


def loads(text):
    return instance_from_dict(json.loads(text))


def save_instance(inst, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(inst))
    logger.debug(f"Saved instance to {path}")
    return path


def load_instance(path):
    return loads(Path(path).read_text())
