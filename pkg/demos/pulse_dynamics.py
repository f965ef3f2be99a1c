"""Single-pulse population dynamics at the working detuning.

Integrates one on-axis probe pulse (54 ns FWHM, 5.7e6 photons, blue of
the F=1 -> F'=0 line by 462 MHz) through an atom prepared in the
stretched ground state |F=1, m=+1>.  Prints the population budget over
time: how much leaks into F=2 through spontaneous decay, how little ends
up in the other F=1 sublevels, and how small the excited fraction stays.

Run:  python demos/pulse_dynamics.py
"""
import numpy as np

from nlfaraday import (
    BeamGeometry,
    PulseSpec,
    build_dipole_operators,
    build_level_scheme,
    initial_state,
    integrate_node,
)

TWO_PI = 2 * np.pi

scheme = build_level_scheme()
ops = build_dipole_operators(scheme)
beam = BeamGeometry(waist=20e-6, wavelength=scheme.wavelength)

pulse = PulseSpec(fwhm=54e-9, n_photons=5.7e6, detuning=TWO_PI * 462e6)
traj = integrate_node(initial_state(scheme), pulse, 1.0, ops, beam=beam)

f2 = traj.manifold_population(2)
exc = traj.excited_population()
m_up = traj.sublevel_population(1, 1)
m_mid = traj.sublevel_population(1, 0)
m_dn = traj.sublevel_population(1, -1)

print(f"pulse: {pulse.fwhm * 1e9:.0f} ns FWHM, {pulse.n_photons:.2g} photons, "
      f"detuning {pulse.detuning / TWO_PI / 1e6:.0f} MHz blue of F=1 -> F'=0")
print(f"integrated {len(traj.times)} stored steps over "
      f"{(traj.times[-1] - traj.times[0]) * 1e9:.0f} ns\n")

header = f"{'t (ns)':>8} {'|1,+1>':>10} {'|1,0>':>10} {'|1,-1>':>10} {'F=2':>10} {'excited':>10}"
print(header)
print("-" * len(header))
for i in np.linspace(0, len(traj.times) - 1, 12).astype(int):
    print(f"{traj.times[i] * 1e9:8.1f} {m_up[i]:10.6f} {m_mid[i]:10.6f} "
          f"{m_dn[i]:10.6f} {f2[i]:10.6f} {exc[i]:10.2e}")

lost = f2[-1] + m_mid[-1] + m_dn[-1] + exc[-1]
print(f"\nF=2 grows monotonically: {bool(np.all(np.diff(f2) >= -1e-9))}")
print(f"final F=2 population:        {f2[-1]:.4f}  ({f2[-1] / lost:.1%} of all losses)")
print(f"final |1,0> + |1,-1>:        {m_mid[-1] + m_dn[-1]:.2e}")
print(f"final excited population:    {exc[-1]:.2e}")
print(f"max trace deviation:         {traj.max_trace_deviation:.2e}")
print(f"most negative eigenvalue:    {traj.min_eigenvalue:.2e}")
