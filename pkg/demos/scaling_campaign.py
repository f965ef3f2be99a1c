"""Sensitivity scaling from synthetic correlation campaigns.

Generates shot-noise-limited measurement campaigns over a grid of probe
photon numbers, extracts the calibration slope at each point, fits the
saturating nonlinear response, and converts the residual scatter into a
fractional spin sensitivity.  The ideal (unsaturated) curve falls as
N^(-3/2), steeper than both the N^(-1/2) standard quantum limit and the
N^(-1) Heisenberg line for phase estimation.

Run:  python demos/scaling_campaign.py
"""
import numpy as np

from nlfaraday import (
    ResponseModel,
    SensitivityModel,
    fit_saturation,
    generate_correlation_campaign,
    linear_regression,
    scaling_exponent,
    sensitivity_curve,
)

A = 3.3e-8          # linear rotation coefficient (rad per spin)
B = 3.8e-16         # nonlinear coefficient (rad per spin per photon)
N_SAT = 6.0e7       # saturation photon number of the nonlinear response
F_Z = 7e5           # collective spin of the prepared sample

grid = np.logspace(6.0, 8.0, 10)
response = ResponseModel()

print("running 10 campaigns of 50 samples each...")
slopes = []
for j, n_nl in enumerate(grid):
    camp = generate_correlation_campaign(float(n_nl), samples=50, seed=500 + j)
    fit = linear_regression(camp.pairs())
    slopes.append((float(n_nl), fit.slope))
    true = response.calibration_slope(float(n_nl))
    print(f"  N = {n_nl:9.3g}: slope {fit.slope:8.5f} +- {fit.slope_stderr:.5f} "
          f"(true {true:.5f})")

model = fit_saturation(slopes, A)
print(f"\nrecovered nonlinear coefficient: {model.nonlinear_coefficient:.3g} "
      f"(injected {B:.3g})")
if model.saturation_photons is not None:
    print(f"recovered saturation photon number: {model.saturation_photons:.3g} "
          f"(injected {N_SAT:.3g})")

# ideal scaling: no saturation, pure nonlinear response at the crossing
ideal = sensitivity_curve(SensitivityModel(0.0, B, None), grid, F_Z)
exp_fit = scaling_exponent(ideal, (1e6, 1e7))
print(f"\nideal fractional-sensitivity exponent over [1e6, 1e7]: "
      f"{exp_fit.exponent:+.3f} +- {exp_fit.stderr:.3f}  (super-Heisenberg: -1.5)")

sat_curve = sensitivity_curve(SensitivityModel(0.0, B, N_SAT), grid, F_Z)
exp_sat = scaling_exponent(sat_curve, (1e6, 1e7))
print(f"with saturation at N_sat = {N_SAT:.1g}:                 "
      f"{exp_sat.exponent:+.3f} +- {exp_sat.stderr:.3f}")

print(f"\n{'N photons':>12} {'ideal dFz/Fz':>14} {'saturated':>12}")
for n, si, ss in zip(grid, ideal.sensitivity, sat_curve.sensitivity):
    print(f"{n:12.3g} {si:14.3e} {ss:12.3e}")
