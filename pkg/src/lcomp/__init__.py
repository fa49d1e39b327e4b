"""Lossless compression of sorted integer lists with error-bounded linear models.

A list is stored as a few line segments plus a small fixed-width residual per
key; keys decode with one multiply-add and one bit-field read each.
"""
from .codec import SpaceReport, access, compress, decompress, decompress_range, decompress_scalar, space_report
from .core import CompressedList, KeyWidth, ResidualArray, Segment, SortedKeyList, residual_bit_width
from .errors import *  # noqa: F401,F403
from .fileformat import deserialize, deserialize_plan, ingest_keys, serialize, serialize_plan
from .partition import PartitionPlan, edge_cost, greedy_partition, optimal_partition
from .pla import count_segments, feasible, fit
from .query import QueryStats, intersect, next_geq, quantile_approx, quantile_exact, segment_key_range, union
from .tuner import TuningStats, calibrate_c, epsilon_opt, gap_stats, space_model

__version__ = "0.1.0"
