"""
Mesh import/export: OBJ (1-based faces) and the JSON mesh schema (0-based faces),
with an optional labels side-table mapping vertex names to indices.
"""
import json
from pathlib import Path

from .geometry_core import build_surface
from .log import get_logger

logger = get_logger('mesh_io')


def write_obj(surface, path, comment=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if comment:
        lines.append(f"# {comment}")
    for x, y, z in surface.vertices:
        lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    for i, j, k in surface.faces:
        lines.append(f"f {i + 1} {j + 1} {k + 1}")
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Wrote {len(surface.faces)} faces to {path}")
    return path


def read_obj(path, labels=None):
    vertices = []
    faces = []
    for raw in Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts or parts[0].startswith('#'):
            continue
        if parts[0] == 'v':
            vertices.append(tuple(float(c) for c in parts[1:4]))
        elif parts[0] == 'f':
            # "f 1/1/1 2/2/2 3/3/3" keeps only the position index
            face = [int(p.split('/')[0]) - 1 for p in parts[1:]]
            if len(face) != 3:
                raise ValueError(f"Only triangular faces are supported, got {raw!r}")
            faces.append(tuple(face))
    return build_surface(vertices, faces, labels)


def mesh_to_dict(surface):
    data = {
        'vertices': [[float(c) for c in p] for p in surface.vertices],
        'faces': [list(f) for f in surface.faces],
    }
    if surface.labels:
        data['labels'] = dict(sorted(surface.labels.items()))
    return data


def mesh_from_dict(data):
    if 'vertices' not in data or 'faces' not in data:
        raise ValueError("Mesh JSON needs 'vertices' and 'faces'")
    return build_surface(data['vertices'], data['faces'], data.get('labels'))


def write_json(surface, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(mesh_to_dict(surface), indent=2, sort_keys=True))
    return path


def read_json(path):
    return mesh_from_dict(json.loads(Path(path).read_text()))


def write_labels(surface, path, metadata=None):
    """Labels side-table shipped next to an OBJ file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {'labels': dict(sorted(surface.labels.items()))}
    if metadata:
        payload['metadata'] = metadata
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    return path


def read_labels(path):
    return json.loads(Path(path).read_text()).get('labels', {})


def load_mesh(path):
    """Load a mesh by extension; an OBJ picks up '<stem>.labels.json' when present."""
    path = Path(path)
    if path.suffix == '.json':
        return read_json(path)
    if path.suffix == '.obj':
        side = path.with_suffix('.labels.json')
        labels = read_labels(side) if side.exists() else None
        return read_obj(path, labels)
    raise ValueError(f"Unsupported mesh format: {path.suffix}")
