"""Impulsive hybrid-control rendezvous simulation on the HCW model.

Modules
-------
hcw
    Plant dynamics, exact propagation, saturation/dead-zone maps, and the
    in-plane coordinate change.
engine
    Generic hybrid executor: fixed-step flow, guard localization, prioritized
    jump resolution.
controllers
    The z, beta, and alpha impulsive stabilizer laws and dwell timers.
closed_loop
    Composition of plant and controllers; Lyapunov functions and attractors.
analysis
    Certificate checks (flow invariance, jump decrease), delta-v budgets,
    convergence times.
config / cli
    Scenario files and the ``hybrid-rdv`` command-line front end.
"""

__version__ = "0.1.0"
