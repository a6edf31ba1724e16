"""Simulation and analysis of fastest-k distributed SGD with adaptive k."""

from .controller import AdaptiveController, ControllerConfig, ControllerState, current_k, observe
from .data import gen_synthetic, load_idx
from .engine import ExperimentConfig, TraceRecord, comm_to_target, partition_data, run, time_to_target
from .numerics import DataSet, LinearModel, LogisticModel
from .stragglers import ResponseDistribution, order_stat_mean, order_stat_variance
from .theory import SystemParams, switching_times

__version__ = "0.1.0"
