"""Snapshot compression and picking the reduction order.

A 12-story hysteretic chain rides out a synthetic quake; its displacement
history is the snapshot matrix. The script looks at the singular value
spectrum, compares two truncation rules (energy fraction vs explicit order),
and then runs the reduced model at increasing orders to show how the online
error, not just the offline energy, decides how many modes are enough.

Run:  python3 demos/03_pod_and_order_selection.py
"""
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from promdyn.excitation import QuakeParams, filtered_noise_quake
from promdyn.metrics import relative_error
from promdyn.model import build_shear_frame
from promdyn.newmark import FullOrderSystem, IntegratorConfig, integrate
from promdyn.pod import SnapshotSet, choose_order, local_basis, order_for_energy

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

STORIES = 12
DT = 0.01


def main():
    model = build_shear_frame(
        stories=STORIES, story_mass=1000.0,
        story_stiffness=np.linspace(1.4e6, 6.0e5, STORIES),
        damping_ratio=0.02,
        link_params={"stiffness": 2.0e5, "amplitude": 1.2,
                     "exponent": 1.5, "z_max": 0.02},
    )
    f1 = model.first_natural_frequency()
    print(f"fundamental frequency: {f1:.3f} Hz")
    # broadband drive so several modes carry energy
    loads = filtered_noise_quake(
        QuakeParams(cutoff_hz=8.0, amplitude=3.0, duration_s=8.0,
                    total_sim_s=8.0, seed=11),
        mass_diag=np.diag(model.mass), dt=DT,
    )

    hist = integrate(FullOrderSystem(model), loads, IntegratorConfig(dt=DT),
                     record_element_forces=True)
    snaps = SnapshotSet(parameter_point=np.array([1.2]),
                        displacements=hist.displacements.T, dt=DT,
                        element_forces=hist.element_forces)

    basis_full = local_basis(snaps, r=STORIES)
    s = basis_full.singular_values
    print("singular values (normalized):",
          np.array2string(s / s[0], precision=3, suppress_small=True))
    for frac in (0.99, 0.999, 0.9999):
        print(f"order for {frac:.2%} energy: {order_for_energy(s, frac)}")

    # offline reconstruction error: project the snapshots themselves
    recon = []
    for r in range(1, STORIES + 1):
        V = basis_full.matrix[:, :r]
        proj = V @ (V.T @ snaps.displacements)
        recon.append(relative_error(snaps.displacements, proj))

    # online selection: rerun the reduced model, compare trajectories
    sel = choose_order(model, snaps, loads, err_threshold_u=0.01,
                       err_threshold_sigma=0.05)
    print(f"choose_order: r = {sel.order}, thresholds satisfied = {sel.satisfied}")
    for row in sel.table:
        print(f"  r={row['r']:2d}  re_u={row['re_u']:.3e}  re_sigma={row['re_sigma']:.3e}")

    fig, axes = plt.subplots(1, 3, figsize=(13, 3.8))
    axes[0].semilogy(np.arange(1, STORIES + 1), s / s[0], "o-")
    axes[0].set(title="singular value decay", xlabel="mode", ylabel="sigma_k / sigma_1")

    axes[1].semilogy(np.arange(1, STORIES + 1), recon, "s-", label="projection of snapshots")
    rs = [row["r"] for row in sel.table]
    axes[1].semilogy(rs, [row["re_u"] for row in sel.table], "o-",
                     label="online reduced run")
    axes[1].axhline(0.01, color="k", lw=0.6, ls=":")
    axes[1].set(title="relative error vs order", xlabel="r", ylabel="RE(u)")
    axes[1].legend()

    for k in range(3):
        axes[2].plot(basis_full.matrix[:, k], np.arange(1, STORIES + 1),
                     "o-", label=f"mode {k + 1}")
    axes[2].set(title="leading POD modes", xlabel="component", ylabel="story")
    axes[2].legend()

    fig.tight_layout()
    path = OUT / "pod_and_order_selection.png"
    fig.savefig(path, dpi=130)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
