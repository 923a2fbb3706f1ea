"""Shear-chain structural models with Bouc-Wen hysteretic links.

The high-fidelity model is an N-story shear chain: one lateral DOF per story,
diagonal mass, tridiagonal linear stiffness, mass-proportional damping
calibrated to a damping ratio at the first natural frequency, and one
Bouc-Wen link per story carrying the hysteretic part of the inter-story
force. The link internal variable z evolves as

    z' = A*x' - beta*|x'|*z*|z|^(w-1) - gamma*x'*|z|^w

and saturates at z_max = (A/(beta+gamma))^(1/w). The link contributes the
force stiffness*A*z across its DOF pair. Within one implicit time step the
link velocity x' is held constant and z is advanced with a single RK4 step;
states are committed only when the step's Newton iteration has converged.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

_ZMAX_SLACK = 1e-9  # allowed relative overshoot of |z| before clamping is an error


@dataclass
class BoucWenLink:
    """One hysteretic link between two DOFs (dof_j=None grounds the link).

    Parameters are the classic Bouc-Wen set: amplitude A, shape parameters
    beta and gamma, exponent w >= 1, elastic scale `stiffness` (the link force
    is stiffness*A*z). `z` is the committed internal state.
    """

    dof_i: int
    dof_j: int | None
    stiffness: float
    amplitude: float
    beta: float
    gamma: float
    exponent: float
    z: float = 0.0

    def __post_init__(self):
        if self.amplitude <= 0.0:
            raise ValueError("link amplitude A must be positive")
        if self.exponent < 1.0:
            raise ValueError("link exponent must be >= 1")
        if self.beta + self.gamma < 0.0:
            raise ValueError("beta + gamma must be non-negative")
        if self.stiffness <= 0.0:
            raise ValueError("link stiffness must be positive")
        if abs(self.z) > self.z_max * (1.0 + _ZMAX_SLACK):
            raise ValueError("initial link state exceeds the saturation level")

    @classmethod
    def from_saturation(cls, dof_i, dof_j, stiffness, amplitude, z_max, exponent) -> "BoucWenLink":
        """Build a link from (A, z_max); beta = gamma follows from the saturation identity."""
        if z_max <= 0.0 or not np.isfinite(z_max):
            raise ValueError("z_max must be finite and positive")
        total = amplitude / z_max**exponent
        return cls(
            dof_i=dof_i,
            dof_j=dof_j,
            stiffness=stiffness,
            amplitude=amplitude,
            beta=0.5 * total,
            gamma=0.5 * total,
            exponent=exponent,
        )

    @property
    def z_max(self) -> float:
        total = self.beta + self.gamma
        if total == 0.0:
            return np.inf
        return (self.amplitude / total) ** (1.0 / self.exponent)

    @property
    def force(self) -> float:
        return self.stiffness * self.amplitude * self.z


@dataclass
class StructuralModel:
    """Assembled matrices plus the hysteretic links.

    The matrices are immutable once assembled; the only mutable state is the
    committed z of each link, owned by exactly one integration run at a time.
    """

    mass: np.ndarray
    damping: np.ndarray
    stiffness: np.ndarray
    links: list
    constrained_dofs: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.mass = np.asarray(self.mass, dtype=float)
        self.damping = np.asarray(self.damping, dtype=float)
        self.stiffness = np.asarray(self.stiffness, dtype=float)
        n = self.mass.shape[0]
        for name, mat in (("mass", self.mass), ("damping", self.damping), ("stiffness", self.stiffness)):
            if mat.shape != (n, n):
                raise ValueError(f"{name} matrix must be {n}x{n}, got {mat.shape}")
        np.linalg.cholesky(0.5 * (self.mass + self.mass.T))  # SPD on the free DOFs
        eig = np.linalg.eigvalsh(0.5 * (self.stiffness + self.stiffness.T))
        if eig.min() < -1e-9 * max(eig.max(), 1.0):
            raise ValueError("linear stiffness must be positive semi-definite")
        for link in self.links:
            if not 0 <= link.dof_i < n:
                raise ValueError(f"link dof_i {link.dof_i} out of range")
            if link.dof_j is not None and not 0 <= link.dof_j < n:
                raise ValueError(f"link dof_j {link.dof_j} out of range")
            if link.dof_j == link.dof_i:
                raise ValueError("link must connect two distinct DOFs or ground")
        self._refresh_link_arrays()

    def _refresh_link_arrays(self):
        links = self.links
        self._idx_i = np.array([lk.dof_i for lk in links], dtype=int)
        self._idx_j = np.array([-1 if lk.dof_j is None else lk.dof_j for lk in links], dtype=int)
        self._k = np.array([lk.stiffness for lk in links])
        self._A = np.array([lk.amplitude for lk in links])
        self._beta = np.array([lk.beta for lk in links])
        self._gamma = np.array([lk.gamma for lk in links])
        self._w = np.array([lk.exponent for lk in links])
        self._zmax = np.array([lk.z_max for lk in links])

    @property
    def ndof(self) -> int:
        return self.mass.shape[0]

    @property
    def n_links(self) -> int:
        return len(self.links)

    def link_pairs(self) -> tuple:
        """(idx_i, idx_j) arrays; idx_j = -1 marks a grounded link."""
        return self._idx_i, self._idx_j

    def link_params(self) -> dict:
        return {
            "stiffness": self._k,
            "amplitude": self._A,
            "beta": self._beta,
            "gamma": self._gamma,
            "exponent": self._w,
            "z_max": self._zmax,
        }

    def link_states(self) -> np.ndarray:
        return np.array([lk.z for lk in self.links])

    def set_link_states(self, z) -> None:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n_links,):
            raise ValueError(f"expected {self.n_links} link states, got shape {z.shape}")
        for lk, zi in zip(self.links, z):
            lk.z = float(zi)

    def reset_link_states(self) -> None:
        for lk in self.links:
            lk.z = 0.0

    def link_drifts(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        x = u[self._idx_i].copy()
        grounded = self._idx_j < 0
        x[~grounded] -= u[self._idx_j[~grounded]]
        return x

    def link_forces(self, z=None) -> np.ndarray:
        if z is None:
            z = self.link_states()
        return self._k * self._A * np.asarray(z, dtype=float)

    def scatter_link_forces(self, f_links) -> np.ndarray:
        """Assemble per-link scalar forces into a nodal force vector."""
        out = np.zeros(self.ndof)
        np.add.at(out, self._idx_i, f_links)
        grounded = self._idx_j < 0
        np.add.at(out, self._idx_j[~grounded], -f_links[~grounded])
        return out

    def first_natural_frequency(self) -> float:
        """First natural frequency in Hz from the assembled (K, M) pencil."""
        lam = scipy.linalg.eigh(self.stiffness, self.mass, eigvals_only=True)
        return float(np.sqrt(lam[0]) / (2.0 * np.pi))


def build_shear_frame(stories, story_mass, story_stiffness, damping_ratio, link_params) -> StructuralModel:
    """Assemble an N-story shear chain with one Bouc-Wen link per story.

    Parameters
    ----------
    stories : int
        Number of stories (= free lateral DOFs); the ground is constrained.
    story_mass, story_stiffness : float or array-like
        Per-story values; scalars are broadcast.
    damping_ratio : float
        Mass-proportional damping C = a0*M with a0 = 2*zeta*omega_1.
    link_params : dict or sequence of dicts
        Per-story Bouc-Wen parameters with keys ``stiffness``, ``amplitude``,
        ``exponent`` and either ``z_max`` or explicit ``beta``/``gamma``. A
        single dict applies to every story.
    """
    stories = int(stories)
    if stories < 1:
        raise ValueError("need at least one story")
    masses = np.broadcast_to(np.asarray(story_mass, dtype=float), (stories,)).copy()
    stiff = np.broadcast_to(np.asarray(story_stiffness, dtype=float), (stories,)).copy()
    if np.any(masses <= 0) or np.any(stiff <= 0):
        raise ValueError("story masses and stiffnesses must be positive")
    if not 0.0 <= damping_ratio < 1.0:
        raise ValueError("damping ratio must lie in [0, 1)")

    mass = np.diag(masses)
    K = np.zeros((stories, stories))
    for i in range(stories):
        K[i, i] += stiff[i]
        if i + 1 < stories:
            K[i, i] += stiff[i + 1]
            K[i, i + 1] -= stiff[i + 1]
            K[i + 1, i] -= stiff[i + 1]

    if isinstance(link_params, dict):
        link_params = [link_params] * stories
    if len(link_params) != stories:
        raise ValueError(f"need one link parameter set per story, got {len(link_params)}")
    links = []
    for i, lp in enumerate(link_params):
        lp = dict(lp)
        dof_j = None if i == 0 else i - 1
        common = dict(
            dof_i=i,
            dof_j=dof_j,
            stiffness=float(lp.pop("stiffness")),
            amplitude=float(lp.pop("amplitude")),
            exponent=float(lp.pop("exponent")),
        )
        if "z_max" in lp:
            links.append(BoucWenLink.from_saturation(z_max=float(lp.pop("z_max")), **common))
        else:
            links.append(BoucWenLink(beta=float(lp.pop("beta")), gamma=float(lp.pop("gamma")), **common))
        if lp:
            raise ValueError(f"unknown link parameter keys {sorted(lp)} for story {i}")

    lam = scipy.linalg.eigh(K, mass, eigvals_only=True)
    omega1 = float(np.sqrt(lam[0]))
    a0 = 2.0 * damping_ratio * omega1
    damping = a0 * mass

    meta = {"kind": "shear_frame", "stories": stories, "a0": a0, "omega1": omega1}
    return StructuralModel(
        mass=mass,
        damping=damping,
        stiffness=K,
        links=links,
        constrained_dofs=("ground",),
        meta=meta,
    )


def _bw_rate(x_dot, z, A, beta, gamma, w):
    zp = np.abs(z) ** (w - 1.0)
    return A * x_dot - beta * np.abs(x_dot) * z * zp - gamma * x_dot * np.abs(z) ** w


def _bw_rate_partials(x_dot, z, A, beta, gamma, w):
    """(df/dx_dot, df/dz) for the Bouc-Wen rate, elementwise."""
    zp = np.abs(z) ** (w - 1.0)
    d_xd = A - beta * np.sign(x_dot) * z * zp - gamma * np.abs(z) ** w
    d_z = -w * zp * (beta * np.abs(x_dot) + gamma * x_dot * np.sign(z))
    return d_xd, d_z


def bw_rk4_step(z0, x_dot, dt, A, beta, gamma, w, z_max):
    """One RK4 step of the Bouc-Wen rate with x_dot held constant, clamped."""
    k1 = _bw_rate(x_dot, z0, A, beta, gamma, w)
    k2 = _bw_rate(x_dot, z0 + 0.5 * dt * k1, A, beta, gamma, w)
    k3 = _bw_rate(x_dot, z0 + 0.5 * dt * k2, A, beta, gamma, w)
    k4 = _bw_rate(x_dot, z0 + dt * k3, A, beta, gamma, w)
    z1 = z0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return np.clip(z1, -z_max, z_max)


def bw_rk4_step_with_sensitivity(z0, x_dot, dt, A, beta, gamma, w, z_max):
    """RK4 step plus the analytic derivative of the new state w.r.t. x_dot.

    The derivative is the chain rule pushed through the four stages; where the
    clamp is active the state no longer responds to x_dot and its sensitivity
    is zero.
    """
    k1 = _bw_rate(x_dot, z0, A, beta, gamma, w)
    s1, _ = _bw_rate_partials(x_dot, z0, A, beta, gamma, w)

    z_a = z0 + 0.5 * dt * k1
    k2 = _bw_rate(x_dot, z_a, A, beta, gamma, w)
    d_xd, d_z = _bw_rate_partials(x_dot, z_a, A, beta, gamma, w)
    s2 = d_xd + d_z * (0.5 * dt * s1)

    z_b = z0 + 0.5 * dt * k2
    k3 = _bw_rate(x_dot, z_b, A, beta, gamma, w)
    d_xd, d_z = _bw_rate_partials(x_dot, z_b, A, beta, gamma, w)
    s3 = d_xd + d_z * (0.5 * dt * s2)

    z_c = z0 + dt * k3
    k4 = _bw_rate(x_dot, z_c, A, beta, gamma, w)
    d_xd, d_z = _bw_rate_partials(x_dot, z_c, A, beta, gamma, w)
    s4 = d_xd + d_z * (dt * s3)

    z1 = z0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    dz_dxdot = dt / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
    clamped = np.abs(z1) > z_max
    z1 = np.clip(z1, -z_max, z_max)
    dz_dxdot = np.where(clamped, 0.0, dz_dxdot)
    return z1, dz_dxdot


def restoring_force(model: StructuralModel, u, v=None, *, z=None) -> np.ndarray:
    """Internal force K*u plus the hysteretic link contributions.

    Uses the committed link states unless ``z`` overrides them; never mutates
    the model. ``v`` is accepted for interface symmetry (the velocity enters
    only through the damping matrix, which the integrator applies itself).
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (model.ndof,):
        raise ValueError(f"u has shape {u.shape}, expected ({model.ndof},)")
    out = model.stiffness @ u
    if model.n_links:
        out += model.scatter_link_forces(model.link_forces(z))
    return out


def update_link_states(model: StructuralModel, x_dot, dt: float, z0=None) -> np.ndarray:
    """Advance every link state one step of size dt with x_dot held constant.

    Returns the new states without committing them; pass the result to
    ``model.set_link_states`` once the step is accepted.
    """
    x_dot = np.asarray(x_dot, dtype=float)
    if x_dot.shape != (model.n_links,):
        raise ValueError(f"x_dot has shape {x_dot.shape}, expected ({model.n_links},)")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if z0 is None:
        z0 = model.link_states()
    return bw_rk4_step(
        np.asarray(z0, dtype=float), x_dot, dt,
        model._A, model._beta, model._gamma, model._w, model._zmax,
    )


def tangent_stiffness(model: StructuralModel, u, v, dt: float, dxdot_dx: float | None = None) -> np.ndarray:
    """Consistent Jacobian of the one-step restoring force w.r.t. u.

    The link state advanced over the step depends on u through the link
    velocity; ``dxdot_dx`` is the scalar sensitivity of that velocity to the
    displacement (the implicit integrator passes gamma/(beta*dt), the default
    1/dt matches a backward difference).
    """
    v = np.asarray(v, dtype=float)
    if dxdot_dx is None:
        dxdot_dx = 1.0 / dt
    Kt = model.stiffness.copy()
    if not model.n_links:
        return Kt
    x_dot = model.link_drifts(v)
    _, dz = bw_rk4_step_with_sensitivity(
        model.link_states(), x_dot, dt,
        model._A, model._beta, model._gamma, model._w, model._zmax,
    )
    coeff = model._k * model._A * dz * dxdot_dx
    idx_i, idx_j = model.link_pairs()
    np.add.at(Kt, (idx_i, idx_i), coeff)
    inter = idx_j >= 0
    np.add.at(Kt, (idx_j[inter], idx_j[inter]), coeff[inter])
    np.add.at(Kt, (idx_i[inter], idx_j[inter]), -coeff[inter])
    np.add.at(Kt, (idx_j[inter], idx_i[inter]), -coeff[inter])
    return Kt
