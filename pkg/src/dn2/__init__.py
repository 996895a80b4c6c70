"""Incremental three-zone developmental network engine.

The network learns task-nonspecifically from a sensory port and a motor
supervision port: hidden neurons recruit by splitting, compete inside
dynamic inhibition sets, maintain their synapses by stability, and settle
into 3D locations.  Harnesses verify emergent finite-automaton learning,
maze planning with cost comparison, and a simulated-cochlea audition
pipeline.
"""

from .competition import CompetitionResult, PrescreenSets, compete, dynamic_competition_set, prescreen
from .growth import GrowthRateTable, almost_perfect_match
from .learning import AmnesicSchedule, CANDID, amnesic_rates, excitatory_update, inhibitory_update
from .maintenance import MaintenanceParams, post_synaptic_maintain, pre_synaptic_maintain, synaptogenic_factor
from .network import DN2Network, HyperParams, PlacementParams, XArea, ZZone, ZoneLayout
from .neuron import ComponentPreResponses, NegativeNeuron, Neuron, PatterningType, SynapseSection, init_from_input
from .normalize import VolumeState, normalize_with_volume, normalized_dot, unit_normalize
from .placement import GlialGrid, Skull, init_glia, nearest_neighbor_via_glia, place_new_neuron, update_locations

__version__ = "0.1.0"

__all__ = [
    "AmnesicSchedule",
    "CANDID",
    "CompetitionResult",
    "ComponentPreResponses",
    "DN2Network",
    "GlialGrid",
    "GrowthRateTable",
    "HyperParams",
    "MaintenanceParams",
    "NegativeNeuron",
    "Neuron",
    "PatterningType",
    "PlacementParams",
    "PrescreenSets",
    "Skull",
    "SynapseSection",
    "VolumeState",
    "XArea",
    "ZZone",
    "ZoneLayout",
    "almost_perfect_match",
    "amnesic_rates",
    "compete",
    "dynamic_competition_set",
    "excitatory_update",
    "inhibitory_update",
    "init_from_input",
    "init_glia",
    "nearest_neighbor_via_glia",
    "normalize_with_volume",
    "normalized_dot",
    "place_new_neuron",
    "post_synaptic_maintain",
    "pre_synaptic_maintain",
    "prescreen",
    "synaptogenic_factor",
    "unit_normalize",
    "update_locations",
]
