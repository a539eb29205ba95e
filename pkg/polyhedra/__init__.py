from .log import get_logger, set_level
from .config import Settings, load_settings
from .geometry_core import PolyhedralSurface, build_surface, is_embedded, triangle_intersection
from .mesh_io import load_mesh, write_labels, write_obj
from .bricard import (TYPE2_REFERENCE, TYPE3_REFERENCE, Type1Params, Type2Params, Type3FlatParams,
                      bricard_type1, bricard_type2, bricard_type3_flat, equators, symmetric_pairs)
from .flex_engine import FlexPath, GaugeFrame, flex_kickoff, polish_sample, trace_flex, trace_from_flat
from .invariants import (dihedral_angle, equator_dehn_sum, invariant_trace, link_convexity, oriented_volume,
                         total_mean_curvature, track_branches, vertex_link)
from .relations import (DehnStatus, build_functional, certify_angle_relations, find_integer_relation,
                        napier_residual, verify_dehn_constancy)
from .steffen import (GluingSpec, build_steffen, glue_external, glue_internal, steffen_flex_scan,
                      subdivide_face)
from .targets import get_target, list_targets

__all__ = [
    'get_logger', 'set_level', 'Settings', 'load_settings',
    'PolyhedralSurface', 'build_surface', 'is_embedded', 'triangle_intersection',
    'load_mesh', 'write_labels', 'write_obj',
    'TYPE2_REFERENCE', 'TYPE3_REFERENCE', 'Type1Params', 'Type2Params', 'Type3FlatParams',
    'bricard_type1', 'bricard_type2', 'bricard_type3_flat', 'equators', 'symmetric_pairs',
    'FlexPath', 'GaugeFrame', 'flex_kickoff', 'polish_sample', 'trace_flex', 'trace_from_flat',
    'dihedral_angle', 'equator_dehn_sum', 'invariant_trace', 'link_convexity', 'oriented_volume',
    'total_mean_curvature', 'track_branches', 'vertex_link',
    'DehnStatus', 'build_functional', 'certify_angle_relations', 'find_integer_relation',
    'napier_residual', 'verify_dehn_constancy',
    'GluingSpec', 'build_steffen', 'glue_external', 'glue_internal', 'steffen_flex_scan', 'subdivide_face',
    'get_target', 'list_targets',
]
