"""Discrete Stark lattice in a continuous field: exact spectral data,
rank-one impurity scattering, Krein-determinant continuation, and the
resonance ladder."""

from .errors import (BranchPointError, ContinuousSpectrumError, ConvergenceError,
                     DegenerateMuError, DomainError, ModelInconsistencyError,
                     PoleError, SingularKreinError, StarkError, StripEscapeError,
                     StripError, ValidationError)
from .fields import AnalyticVector, ExtendedVector, LatticeFieldVector, PiecewisePoly
from .numerics import (ModelParams, band_log, bessel_cutoff, bessel_j,
                       mode_index, resolve_theta_sign)
from .unperturbed import (GeneralizedEigenfunction, StarkEigenvector,
                          apply_spectral_projection, discrete_resolvent_entry,
                          eigenfunction, full_resolvent_entry, spectral_measure_eta,
                          stark_eigenvector)
from .impurity import (ChannelVectors, ImpurityParams, KreinEvaluation,
                       PoleCancellationReport, g_continuum, g_discrete, krein_q,
                       pole_cancellation_check, r11_form, r12_form, r21_form,
                       r22_entry, rb_form)
from .continuation import (ContinuedValue, Direction, Strip, cauchy_form,
                           continued_cauchy_form, continued_g_continuum,
                           continued_krein, continued_resolvent_form,
                           continued_tau, resolvent_form, strip, tau_form)
from .resonances import (LadderResult, Resonance, count_zeros_lower_halfstrip,
                         dispersion_lhs, find_resonance, perturbative_resonance,
                         resonance_ladder, winding_number)
from .friedrichs import (FriedrichsDensity, FriedrichsFormReport, FriedrichsState,
                         band_packet, discrete_state, friedrichs_form_check,
                         mixed_state, spectral_density)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
