"""Instance generators, metrics and the experiment harness."""

from .generators import ALIASES, FAMILIES, GeneratorSpec, generate
from .harness import ExperimentConfig, Report, initial_solution, permute_instance, run_experiment, write_report
from .metrics import MetricSeries, primal_gap, primal_integral, scaled_primal_gap, shifted_geometric_mean
