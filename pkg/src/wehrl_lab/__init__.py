"""Numerical checks for the spin coherent-state channel and its entropy bounds."""

from .channel import (KrausSet, apply_channel, channel_output, coherent_eigenvalues_exact,
                      coherent_output_spectrum, kraus_set, output_spectra)
from .concave import STANDARD_FAMILY, ConcaveSpec
from .coupling import (clebsch_gordan, coupling_isometry, min_spin_isometry,
                       pminus_formula_check)
from .entropy import (classical_concave_average, classical_limit_curve, coherent_classical_average,
                      converged_average, meridian_average, von_neumann_entropy, wehrl_entropy)
from .estimators import CoherentChannel, MinimalOutputEntropySearch
from .glauber import (FockDensity, bloch_limit_curve, glauber_concave_integral, glauber_scan,
                      glauber_vacuum_value, husimi)
from .majorization import concave_sum, majorization_slack, majorizes, spectrum, trace_concave
from .optimizer import (SearchConfig, conjecture_scan, minimize_output_concave, sample_density,
                        sample_pure_state)
from .spin import (antiunitary_U, coherent_ket, conjugate_by_U, lower_symbol, spin_operators,
                   sphere_quadrature)

__all__ = [
    "KrausSet", "apply_channel", "channel_output", "coherent_eigenvalues_exact",
    "coherent_output_spectrum", "kraus_set", "output_spectra",
    "STANDARD_FAMILY", "ConcaveSpec",
    "clebsch_gordan", "coupling_isometry", "min_spin_isometry", "pminus_formula_check",
    "classical_concave_average", "classical_limit_curve", "coherent_classical_average",
    "converged_average", "meridian_average", "von_neumann_entropy", "wehrl_entropy",
    "CoherentChannel", "MinimalOutputEntropySearch",
    "FockDensity", "bloch_limit_curve", "glauber_concave_integral", "glauber_scan",
    "glauber_vacuum_value", "husimi",
    "concave_sum", "majorization_slack", "majorizes", "spectrum", "trace_concave",
    "SearchConfig", "conjecture_scan", "minimize_output_concave", "sample_density",
    "sample_pure_state",
    "antiunitary_U", "coherent_ket", "conjugate_by_U", "lower_symbol", "spin_operators",
    "sphere_quadrature",
]
