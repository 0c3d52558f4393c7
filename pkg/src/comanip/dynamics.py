"""Planar rigid-body dynamics of a carried board.

The board is a rectangular prism moving in the horizontal plane (x, y, theta_z).
A leader applies 3D forces at two handles on one end; a follower holds the
opposite end through a planar spring-damper grasp. Vertical force components
never move the board (it is carried at constant height) but are kept because
the tilt torques they produce are the follower's trigger channels.

Axes follow the anatomical convention: x anterior, y lateral, z superior.
All integration is semi-implicit Euler at a fixed step, which is symplectic
for the free board and therefore drift-free under zero input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

FORCE_SATURATION = 200.0  # N, per axis; an order of magnitude above human effort
DEFAULT_DT = 0.002        # s, 500 Hz control rate


class ValidationError(ValueError):
    """Raised when a physical quantity violates its contract (non-finite, wrong sign)."""


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValidationError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class TableGeometry:
    """Mass and shape of the carried board (rectangular prism).

    Handle offsets locate the two leader handles in the table frame; grasp
    offsets locate the follower's hands on the opposite end. Inertia follows
    the uniform-prism formulas, so it is derived rather than stored.
    """

    mass: float = 10.3    # kg
    length: float = 1.22  # m, x extent
    width: float = 0.59   # m, y extent
    depth: float = 0.02   # m, z extent
    force_saturation: float = FORCE_SATURATION

    def __post_init__(self) -> None:
        if not (self.mass > 0):
            raise ValidationError(f"mass must be positive, got {self.mass}")
        if not (self.length > self.width > self.depth > 0):
            raise ValidationError(
                f"expected length > width > depth > 0, got "
                f"{self.length}, {self.width}, {self.depth}"
            )

    @property
    def ixx(self) -> float:
        return self.mass * (self.width**2 + self.depth**2) / 12.0

    @property
    def iyy(self) -> float:
        return self.mass * (self.length**2 + self.depth**2) / 12.0

    @property
    def izz(self) -> float:
        return self.mass * (self.length**2 + self.width**2) / 12.0

    @property
    def handle_offsets(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Leader handle positions (left, right) in the table frame."""
        return ((self.length / 2, self.width / 2), (self.length / 2, -self.width / 2))

    @property
    def grasp_offsets(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Follower grasp positions (left, right) in the table frame."""
        return ((-self.length / 2, self.width / 2), (-self.length / 2, -self.width / 2))


@dataclass(frozen=True)
class TableState:
    """Pose, twist and planar acceleration of the board in the world frame."""

    t: float = 0.0
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    wz: float = 0.0
    ax: float = 0.0
    ay: float = 0.0
    alpha: float = 0.0

    def validate(self) -> None:
        _require_finite(
            "TableState", self.t, self.x, self.y, self.theta,
            self.vx, self.vy, self.wz, self.ax, self.ay, self.alpha,
        )


@dataclass(frozen=True)
class HandleWrench:
    """3D force at each leader handle, expressed in the table frame.

    left/right are (Fx, Fy, Fz) tuples. These are the only sensed forces in
    the dyad; the follower's grasp forces are never measured, mirroring a
    sensor pair mounted on the leader handles only.
    """

    left: tuple[float, float, float] = (0.0, 0.0, 0.0)
    right: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def validate(self, saturation: float = FORCE_SATURATION) -> None:
        _require_finite("HandleWrench", *self.left, *self.right)
        for v in (*self.left, *self.right):
            if abs(v) > saturation:
                raise ValidationError(f"handle force {v} exceeds saturation {saturation}")

    def clamped(self, saturation: float = FORCE_SATURATION) -> tuple["HandleWrench", bool]:
        """Per-axis clamp. Returns (wrench, hit_flag)."""
        vals = (*self.left, *self.right)
        hit = any(abs(v) > saturation for v in vals)
        if not hit:
            return self, False
        cl = tuple(max(-saturation, min(saturation, v)) for v in vals)
        return HandleWrench(left=cl[:3], right=cl[3:]), True

    @property
    def planar_force(self) -> tuple[float, float]:
        """Net (Fx, Fy) on the board, the components that can move it."""
        return (self.left[0] + self.right[0], self.left[1] + self.right[1])

    def scaled(self, a: float) -> "HandleWrench":
        return HandleWrench(
            left=tuple(a * v for v in self.left),
            right=tuple(a * v for v in self.right),
        )

    def __add__(self, other: "HandleWrench") -> "HandleWrench":
        return HandleWrench(
            left=tuple(p + q for p, q in zip(self.left, other.left)),
            right=tuple(p + q for p, q in zip(self.right, other.right)),
        )


ZERO_WRENCH = HandleWrench()


@dataclass
class GraspCompliance:
    """Planar spring-damper between the follower base and the board edge.

    The anchor rides on the follower base (a velocity-controlled mobile
    platform); its pose/twist fields are updated by whoever commands the base.
    Positive stiffness pulls the grasped board edge toward the anchor. This
    stands in for compliant arms on a base that does the gross motion.
    """

    kx: float = 300.0      # N/m
    ky: float = 300.0      # N/m
    ktheta: float = 60.0   # N*m/rad
    bx: float = 110.0      # N*s/m, near-critical for the default board
    by: float = 110.0
    btheta: float = 20.0   # N*m*s/rad
    base_x: float = 0.0
    base_y: float = 0.0
    base_theta: float = 0.0
    base_vx: float = 0.0
    base_vy: float = 0.0
    base_wz: float = 0.0

    def __post_init__(self) -> None:
        for name in ("kx", "ky", "ktheta", "bx", "by", "btheta"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")


def critically_damped_grasp(geom: TableGeometry, kx: float = 300.0,
                            ktheta: float = 60.0,
                            rot_damping_ratio: float = 1.8) -> GraspCompliance:
    """Grasp compliance with damping sized for the given board.

    Linear channels are critical for the board mass. The rotational channel
    is sized for the board pivoting about the grasped edge (the
    follower-driven rotation regime) and deliberately overdamped: the edge
    also rides on the linear springs, and that coupling brings back
    overshoot a single-channel critical value would miss.
    """
    b_lin = 2.0 * math.sqrt(kx * geom.mass)
    pivot_inertia = geom.izz + geom.mass * (geom.length / 2) ** 2
    b_rot = rot_damping_ratio * 2.0 * math.sqrt(ktheta * pivot_inertia)
    return GraspCompliance(kx=kx, ky=kx, ktheta=ktheta,
                           bx=b_lin, by=b_lin, btheta=b_rot)


def board_torques(wrench: HandleWrench, geom: TableGeometry) -> tuple[float, float, float]:
    """Resultant torque at the board center from the two handle forces.

    The sensor torques themselves are neglected; only the reaction forces at
    the handle lever arms contribute. Returns (tau_x, tau_y, tau_z) in N*m.
    """
    _require_finite("wrench", *wrench.left, *wrench.right)
    flx, fly, flz = wrench.left
    frx, fry, frz = wrench.right
    w2 = geom.width / 2.0
    l2 = geom.length / 2.0
    d = geom.depth
    tx = (flz - frz) * w2 + (fry + fly) * d
    ty = (frz + flz) * l2 - (frx + flx) * d
    tz = (frx - flx) * w2 - (fry + fly) * l2
    return (tx, ty, tz)


def euler_torque(omega: tuple[float, float, float],
                 alpha: tuple[float, float, float],
                 geom: TableGeometry) -> tuple[float, float, float]:
    """Torque required to produce angular acceleration alpha at angular rate omega.

    Full rigid-body form with the gyroscopic cross terms; for planar motion
    (omega_x = omega_y = 0) it reduces to (Ixx*ax, Iyy*ay, Izz*az).
    """
    wx, wy, wz = omega
    ax, ay, az = alpha
    tex = geom.ixx * ax - (geom.iyy - geom.izz) * wy * wz
    tey = geom.iyy * ay - (geom.izz - geom.ixx) * wx * wz
    tez = geom.izz * az - (geom.ixx - geom.iyy) * wx * wy
    return (tex, tey, tez)


def external_torque(state: TableState, geom: TableGeometry) -> tuple[float, float, float]:
    """Torque explaining the board's measured angular acceleration (planar)."""
    return euler_torque((0.0, 0.0, state.wz), (0.0, 0.0, state.alpha), geom)


def grasp_wrench(state: TableState, grasp: GraspCompliance,
                 geom: TableGeometry) -> tuple[float, float, float]:
    """Planar force and torque the follower grasp exerts on the board.

    The spring connects the base anchor to the board's grasp edge; the force
    acts at that edge, so its moment about the board center is included.
    Returns (Fx, Fy, tau_z) in the world frame.
    """
    c, s = math.cos(state.theta), math.sin(state.theta)
    # grasp edge midpoint in world coordinates
    rx = c * (-geom.length / 2)
    ry = s * (-geom.length / 2)
    gx = state.x + rx
    gy = state.y + ry
    gvx = state.vx - state.wz * ry
    gvy = state.vy + state.wz * rx
    fx = grasp.kx * (grasp.base_x - gx) + grasp.bx * (grasp.base_vx - gvx)
    fy = grasp.ky * (grasp.base_y - gy) + grasp.by * (grasp.base_vy - gvy)
    tz = (grasp.ktheta * (grasp.base_theta - state.theta)
          + grasp.btheta * (grasp.base_wz - state.wz)
          + rx * fy - ry * fx)
    return (fx, fy, tz)


def step(state: TableState, leader: HandleWrench, grasp: GraspCompliance | None,
         geom: TableGeometry, dt: float = DEFAULT_DT) -> TableState:
    """Advance the board one fixed step under leader and grasp loads.

    Semi-implicit Euler: acceleration from the net planar wrench, velocity
    first, then pose with the updated velocity. Vertical leader components are
    carried for sensing but exert no planar load.
    """
    if not (dt > 0):
        raise ValidationError(f"dt must be positive, got {dt}")
    state.validate()
    _require_finite("wrench", *leader.left, *leader.right)

    fx, fy = leader.planar_force
    tz = board_torques(leader, geom)[2]
    if grasp is not None:
        gfx, gfy, gtz = grasp_wrench(state, grasp, geom)
        fx += gfx
        fy += gfy
        tz += gtz

    ax = fx / geom.mass
    ay = fy / geom.mass
    alpha = tz / geom.izz
    vx = state.vx + ax * dt
    vy = state.vy + ay * dt
    wz = state.wz + alpha * dt
    return TableState(
        t=state.t + dt,
        x=state.x + vx * dt,
        y=state.y + vy * dt,
        theta=state.theta + wz * dt,
        vx=vx, vy=vy, wz=wz,
        ax=ax, ay=ay, alpha=alpha,
    )


class BoardSim:
    """Mutable wrapper around ``step`` for tight loops.

    Holds plain float attributes so a million free-flight steps stay cheap.
    Not shareable across concurrent callers; snapshot with ``.state``.
    """

    __slots__ = ("geom", "t", "x", "y", "theta", "vx", "vy", "wz",
                 "ax", "ay", "alpha")

    def __init__(self, geom: TableGeometry | None = None,
                 state: TableState | None = None) -> None:
        self.geom = geom or TableGeometry()
        st = state or TableState()
        self.t = st.t
        self.x, self.y, self.theta = st.x, st.y, st.theta
        self.vx, self.vy, self.wz = st.vx, st.vy, st.wz
        self.ax, self.ay, self.alpha = st.ax, st.ay, st.alpha

    @property
    def state(self) -> TableState:
        return TableState(t=self.t, x=self.x, y=self.y, theta=self.theta,
                          vx=self.vx, vy=self.vy, wz=self.wz,
                          ax=self.ax, ay=self.ay, alpha=self.alpha)

    def advance(self, fx: float, fy: float, tz: float, dt: float) -> None:
        """One semi-implicit step under a raw planar wrench (hot path)."""
        m = self.geom.mass
        ax = fx / m
        ay = fy / m
        alpha = tz / self.geom.izz
        vx = self.vx + ax * dt
        vy = self.vy + ay * dt
        wz = self.wz + alpha * dt
        self.vx, self.vy, self.wz = vx, vy, wz
        self.x += vx * dt
        self.y += vy * dt
        self.theta += wz * dt
        self.t += dt
        self.ax, self.ay, self.alpha = ax, ay, alpha

    def step(self, leader: HandleWrench, grasp: GraspCompliance | None,
             dt: float = DEFAULT_DT) -> TableState:
        """Contract-checked step; same math as the module-level ``step``."""
        if not (dt > 0):
            raise ValidationError(f"dt must be positive, got {dt}")
        fx, fy = leader.planar_force
        tz = board_torques(leader, self.geom)[2]
        if grasp is not None:
            gfx, gfy, gtz = grasp_wrench(self.state, grasp, self.geom)
            fx += gfx
            fy += gfy
            tz += gtz
        self.advance(fx, fy, tz, dt)
        return self.state


def linear_momentum(state: TableState, geom: TableGeometry) -> tuple[float, float]:
    return (geom.mass * state.vx, geom.mass * state.vy)


def angular_momentum(state: TableState, geom: TableGeometry) -> float:
    return geom.izz * state.wz
