"""Microgrid planning model: instance data, operational blocks, masters, costs."""
from .clustering import Clustering, cluster_days, cluster_profiles
from .costs import CostBreakdown, cost_breakdown
from .instance import (GridInterface, InstanceError, Line, Penalties, PlanningInstance,
                       RepresentativeDay, Unit, instance_from_dict, instance_to_dict, load_instance)
from .master import (AGG_KEYS, Master, MasterSolution, add_cut, build_master, build_master_a1,
                     build_master_a2, fleet_breve, solve_master, unit_contribution)
from .operational import InfeasibleStructure, build_operational_constraints, check_structure
