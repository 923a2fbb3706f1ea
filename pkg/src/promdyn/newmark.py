"""Implicit Newmark time stepping with Newton-Raphson equilibrium iteration.

The default constants (beta=1/4, gamma=1/2, average acceleration) are
unconditionally stable and energy-conserving on linear problems. Each step
solves the dynamic residual

    R(u) = M*a(u) + C*v(u) + g(u, v(u)) - f

for the end-of-step displacement, where the Newmark kinematics express a and
v through u. Hysteretic states are advanced inside each Newton trial and
committed exactly once, when the step has converged.

The stepping loop talks to the model through a small system interface (mass,
damping, force, tangent, commit); both the full-order adapter defined here
and the reduced systems implement it, so full and reduced integration share
one code path.
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import NewtonConvergenceError
from .excitation import LoadHistory
from .model import StructuralModel, restoring_force, tangent_stiffness, update_link_states


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    beta: float = 0.25
    gamma: float = 0.5
    newton_tol: float = 1e-8
    max_newton_iters: int = 30

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if not (2.0 * self.beta >= self.gamma >= 0.5):
            raise ValueError(
                f"unconditional stability requires 2*beta >= gamma >= 1/2, "
                f"got beta={self.beta}, gamma={self.gamma}"
            )
        if self.newton_tol <= 0.0 or self.max_newton_iters < 1:
            raise ValueError("newton_tol must be positive and max_newton_iters >= 1")


@dataclass
class ResponseHistory:
    """Sampled response: row k holds the state at t_k = k*dt."""

    dt: float
    displacements: np.ndarray  # (T, m)
    velocities: np.ndarray
    accelerations: np.ndarray
    wall_time_s: float
    newton_iteration_counts: np.ndarray  # (T,), zero for the initial row
    newton_residual_ratios: np.ndarray  # (T,), NaN where fewer than 2 iterations
    element_forces: np.ndarray | None = None  # (n_links, T) committed link forces

    @property
    def steps(self) -> int:
        return self.displacements.shape[0]

    @property
    def ndof(self) -> int:
        return self.displacements.shape[1]


class FullOrderSystem:
    """System interface over a StructuralModel for the stepping loop."""

    def __init__(self, model: StructuralModel):
        self.model = model
        self.mass = model.mass
        self.damping = model.damping
        self.ndof = model.ndof

    def reset(self):
        self.model.reset_link_states()

    def force(self, u, v, dt):
        z = update_link_states(self.model, self.model.link_drifts(v), dt)
        return restoring_force(self.model, u, z=z)

    def tangent(self, u, v, dt, dv_du):
        return tangent_stiffness(self.model, u, v, dt, dxdot_dx=dv_du)

    def commit(self, u, v, dt):
        z = update_link_states(self.model, self.model.link_drifts(v), dt)
        self.model.set_link_states(z)

    def committed_element_forces(self):
        return self.model.link_forces()


def integrate(system, loads: LoadHistory, cfg: IntegratorConfig, *, u0=None, v0=None,
              record_element_forces: bool = False) -> ResponseHistory:
    """Run the implicit Newmark loop over the full load history.

    Parameters
    ----------
    system : StructuralModel or any object with the system interface
        (attributes ``mass``, ``damping``, ``ndof``; methods ``reset``,
        ``force(u, v, dt)``, ``tangent(u, v, dt, dv_du)``, ``commit(u, v,
        dt)``, ``committed_element_forces()``).
    loads : LoadHistory sampled on the integrator's grid (loads.dt == cfg.dt).
    u0, v0 : optional initial conditions, zero by default.
    record_element_forces : store the committed per-link forces at every step.

    Raises
    ------
    NewtonConvergenceError
        When a step does not converge; the step index is reported and the run
        aborts (no partial history is returned).
    """
    if isinstance(system, StructuralModel):
        system = FullOrderSystem(system)
    if abs(loads.dt - cfg.dt) > 1e-12 * cfg.dt:
        raise ValueError(f"loads sampled at dt={loads.dt}, integrator expects {cfg.dt}")
    m = system.ndof
    if loads.ndof != m:
        raise ValueError(f"loads have {loads.ndof} DOFs, system has {m}")

    steps = loads.steps
    dt = cfg.dt
    beta, gamma = cfg.beta, cfg.gamma
    a_coef = 1.0 / (beta * dt * dt)
    v_coef = gamma / (beta * dt)

    system.reset()
    u = np.zeros(m) if u0 is None else np.asarray(u0, dtype=float).copy()
    v = np.zeros(m) if v0 is None else np.asarray(v0, dtype=float).copy()
    if u.shape != (m,) or v.shape != (m,):
        raise ValueError("initial conditions have the wrong shape")

    U = np.zeros((steps, m))
    V = np.zeros((steps, m))
    A = np.zeros((steps, m))
    iters = np.zeros(steps, dtype=int)
    ratios = np.full(steps, np.nan)
    forces = [] if record_element_forces else None

    # Consistent initial acceleration from the committed state.
    f0 = loads.samples[0]
    a = np.linalg.solve(system.mass, f0 - system.damping @ v - system.force(u, v, dt))
    U[0], V[0], A[0] = u, v, a
    if forces is not None:
        ef = system.committed_element_forces()
        forces.append(None if ef is None else ef.copy())

    t_start = time.perf_counter()
    for step in range(1, steps):
        f_ext = loads.samples[step]
        u_pred = u + dt * v + dt * dt * (0.5 - beta) * a
        v_pred = v + dt * (1.0 - gamma) * a

        u_new = u_pred.copy()
        res_prev = None
        res0 = None
        converged = False
        for it in range(cfg.max_newton_iters):
            a_new = a_coef * (u_new - u_pred)
            v_new = v_pred + gamma * dt * a_new
            residual = (
                system.mass @ a_new + system.damping @ v_new
                + system.force(u_new, v_new, dt) - f_ext
            )
            res_norm = float(np.linalg.norm(residual))
            if res0 is None:
                res0 = res_norm
                if res0 == 0.0:
                    converged = True
                    break
            elif res_norm <= cfg.newton_tol * res0:
                converged = True
                if res_prev is not None and res_prev > 0.0:
                    ratios[step] = res_norm / res_prev
                break
            jac = (
                a_coef * system.mass + v_coef * system.damping
                + system.tangent(u_new, v_new, dt, v_coef)
            )
            u_new = u_new + np.linalg.solve(jac, -residual)
            iters[step] += 1
            res_prev = res_norm
        if not converged:
            raise NewtonConvergenceError(step, res_norm)

        a = a_coef * (u_new - u_pred)
        v = v_pred + gamma * dt * a
        u = u_new
        system.commit(u, v, dt)
        U[step], V[step], A[step] = u, v, a
        if forces is not None:
            ef = system.committed_element_forces()
            forces.append(None if ef is None else ef.copy())
    wall = time.perf_counter() - t_start

    element_forces = None
    if forces is not None and forces[0] is not None:
        element_forces = np.array(forces).T  # (n_links, T)
    return ResponseHistory(
        dt=dt,
        displacements=U,
        velocities=V,
        accelerations=A,
        wall_time_s=wall,
        newton_iteration_counts=iters,
        newton_residual_ratios=ratios,
        element_forces=element_forces,
    )


def integrate_reduced(rom, loads: LoadHistory, cfg: IntegratorConfig, *, u0=None, v0=None,
                      record_element_forces: bool = False) -> ResponseHistory:
    """Integrate a reduced system; nodal loads are projected onto the basis.

    The history is returned in reduced coordinates; use
    ``rom.reconstruct(history.displacements)`` for full-order fields.
    """
    loads_r = rom.map_loads(loads)
    return integrate(
        rom, loads_r, cfg, u0=u0, v0=v0, record_element_forces=record_element_forces
    )
