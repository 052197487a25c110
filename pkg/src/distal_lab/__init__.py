"""distal-lab: a numerical laboratory for minimal distal torus dynamics.

Exact lattice orbits of rotations and skew products, lacunary cocycles and
their coboundary residuals, two-time-scale Birkhoff scans, integer-relation
disjointness verdicts, finite factor-relation closures, and piecewise-linear
interpolation of divergent orbit sequences to the real line.
"""

__version__ = "0.1.0"

from .torus import (Frac128, TorusPoint, RotationAngle, BestApproxError,
                    frac_add, continued_fraction, liouville_angle,
                    sparse_power_angle, named_angle)
from .flows import (Flow, RotationFlow, SkewFlow, ProductFlow, SampledRFlow,
                    OrbitStream, step, time_change, density_probe, product_flow)
from .cocycle import (CocycleSpec, MeasurableSolution, build_cocycle, eval_phi,
                      residual_eq1, residual_eq2)
from .ergodic import (EmpiricalMeasure, MeanEstimate, GapReport, birkhoff,
                      two_scale_scan, empirical_measure, joining_marginal_check,
                      continuous_time_mean, mean_gap, control_gap)
from .disjoint import (RelationCertificate, IndependenceVerdict, integer_relation,
                       rotation_family_verdict, extend_independent_family,
                       cross_validate)
from .relations import (FiniteCarrier, FiniteRelation, factor_closure,
                        product_closure_check, rp_probe)
from .interp import (DistalSequence, InterpolatedFunction, generate_h,
                     even_zero_normalize, interpolate, equicontinuity_check,
                     divergent_means)
