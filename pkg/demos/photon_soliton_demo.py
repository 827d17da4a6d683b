"""Photon soliton: ground state, the pure-cubic family and the energy-radius law.

Run ``python3 demos/photon_soliton_demo.py``.
"""

import numpy as np

from solitonlab.numerics import find_root
from solitonlab.photon_soliton import (
    PhotonUnits,
    cubic_family,
    field_residual,
    ground_state,
    soliton_energy,
    uehling_point_asymptotics,
)

units = PhotonUnits.from_constants()
print(f"energy unit eps_b = {units.eps_b_mec2:.5f} m_e c^2")

a_star, prof, rep = ground_state(1.0)
e = soliton_energy(prof, units)
print(f"ground state: a* = {a_star:.10f}, residual {field_residual(prof):.1e}")
print(f"  energy {e.energy_mec2:.4f} m_e c^2, radius {e.radius_re:.3f} r_e, central field {e.central_field_Ecl:.3f} E_cl")

_, fam = cubic_family(np.geomspace(2.0, 200.0, 9), units=units)
print(f"{'a':>8s} {'radius/r_e':>12s} {'energy/mc^2':>12s} {'E0/E_cl':>10s}")
for row in zip(fam["a"], fam["radius_re"], fam["energy_mec2"], fam["central_field_Ecl"]):
    print("{:8.3f} {:12.5f} {:12.5f} {:10.3f}".format(*row))
slope = np.polyfit(np.log(fam["radius_re"]), np.log(fam["energy_mec2"]), 1)[0]
print(f"log-log slope of energy against radius: {slope:.4f}")

a1, _ = find_root(lambda a: cubic_family([a], units=units)[1]["energy_mec2"][0] - 1.0, (1.0, 10.0), 1e-12)
one = cubic_family([a1], units=units)[1]
print(f"member with 1 m_e c^2: a={a1:.4f}, radius {one['radius_re'][0]:.3f} r_e, "
      f"central field {one['central_field_Ecl'][0]:.3f} E_cl")

u = uehling_point_asymptotics(np.array([1e-14, 1e-13, 1e-12, 3e-12]))
print("Uehling relative correction:", np.array2string(u.correction, precision=3), "branches", list(u.branch))
