"""Method of moving asymptotes for the robust mechanism problem.

Solves, one outer iteration at a time,

    minimize    f_0(x) + a0 z + sum(c_i y_i + 0.5 d_i y_i^2)
    subject to  f_i(x) - a_i z - y_i <= 0,   xmin <= x <= xmax,   y, z >= 0

with a primal-dual interior point method on the convex subproblem.
Vectors are column vectors of shape (n, 1) and (m, 1).
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from app.core.exceptions import ContractViolationError, NumericalError

logger = logging.getLogger(__name__)

EPSIMIN = 1e-7
RAA0 = 1e-5
ALBEFA = 0.1
ASYINIT = 0.5
ASYINCR = 1.2
ASYDECR = 0.7

A0 = 1.0
A_DEFAULT = 0.0
C_DEFAULT = 1000.0
D_DEFAULT = 1.0

RELAXATION_TOL = 1e-6

_SUBSOLV_MAX_INNER = 200
_SUBSOLV_MAX_LINE_SEARCH = 50


@dataclass
class MMAState:
    """Iterates and asymptotes carried between outer iterations."""

    x: np.ndarray = field(repr=False)
    x_old1: np.ndarray = field(repr=False)
    x_old2: np.ndarray = field(repr=False)
    low: np.ndarray = field(repr=False)
    upp: np.ndarray = field(repr=False)
    iteration: int = 0
    kkt_norm: float = float("inf")
    max_slack: float = 0.0


@dataclass
class SubproblemSolution:
    x: np.ndarray
    y: np.ndarray
    z: float
    lam: np.ndarray
    xsi: np.ndarray
    eta: np.ndarray
    mu: np.ndarray
    zet: float
    s: np.ndarray


class MMASolver:
    """Stateful MMA driver; call :meth:`update` once per design iteration."""

    def __init__(
        self,
        n: int,
        m: int,
        xmin: np.ndarray,
        xmax: np.ndarray,
        move: float = 0.1,
        a0: float = A0,
        a: Optional[np.ndarray] = None,
        c: Optional[np.ndarray] = None,
        d: Optional[np.ndarray] = None,
    ):
        """
        Args:
            n: Number of variables
            m: Number of constraints
            xmin: Lower bounds (n,)
            xmax: Upper bounds (n,)
            move: Move limit as a fraction of each variable's range
            a0, a, c, d: MMA constants; defaults give the standard formulation
        """
        self.n = n
        self.m = m
        self.xmin = np.asarray(xmin, dtype=float).reshape(-1, 1)
        self.xmax = np.asarray(xmax, dtype=float).reshape(-1, 1)
        if self.xmin.shape != (n, 1) or self.xmax.shape != (n, 1):
            raise ContractViolationError("variable bounds must have one entry per variable")
        if np.any(self.xmax < self.xmin):
            raise ContractViolationError("upper bounds must not be below lower bounds")
        self.move = move
        self.a0 = a0
        self.a = np.full((m, 1), A_DEFAULT) if a is None else np.asarray(a, float).reshape(m, 1)
        self.c = np.full((m, 1), C_DEFAULT) if c is None else np.asarray(c, float).reshape(m, 1)
        self.d = np.full((m, 1), D_DEFAULT) if d is None else np.asarray(d, float).reshape(m, 1)
        self.state: Optional[MMAState] = None

    def update(
        self,
        x: np.ndarray,
        df0dx: np.ndarray,
        fval: np.ndarray,
        dfdx: np.ndarray,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Perform one MMA iteration.

        Args:
            x: Current variables (n,)
            df0dx: Objective gradient (n,)
            fval: Constraint values (m,), feasible when <= 0
            dfdx: Constraint gradients (m, n)

        Returns:
            Tuple[np.ndarray, np.ndarray]: New variables (n,) and slacks y (m,)

        Raises:
            ContractViolationError: If operand shapes disagree
            NumericalError: If any gradient is not finite
        """
        xval = np.asarray(x, dtype=float).reshape(-1, 1)
        df0dx = np.asarray(df0dx, dtype=float).reshape(-1, 1)
        fval = np.asarray(fval, dtype=float).reshape(-1, 1)
        dfdx = np.asarray(dfdx, dtype=float)
        if xval.shape != (self.n, 1) or df0dx.shape != (self.n, 1):
            raise ContractViolationError(f"expected {self.n} variables, got {xval.shape[0]}")
        if fval.shape != (self.m, 1) or dfdx.shape != (self.m, self.n):
            raise ContractViolationError(
                f"expected {self.m} constraints over {self.n} variables, got {dfdx.shape}"
            )
        if not (np.all(np.isfinite(df0dx)) and np.all(np.isfinite(fval)) and np.all(np.isfinite(dfdx))):
            raise NumericalError("non-finite objective or constraint data passed to MMA")

        if self.state is None:
            self.state = MMAState(
                x=xval.copy(), x_old1=xval.copy(), x_old2=xval.copy(),
                low=self.xmin.copy(), upp=self.xmax.copy(),
            )
        state = self.state
        state.iteration += 1

        low, upp, alfa, beta = self._asymptotes(state, xval)
        p0, q0, p, q, b = self._approximation(xval, low, upp, df0dx, fval, dfdx)
        sol = _subsolv(self.m, self.n, low, upp, alfa, beta, p0, q0, p, q, self.a0, self.a, b, self.c, self.d)

        state.low, state.upp = low, upp
        state.x_old2, state.x_old1, state.x = state.x_old1, xval.copy(), sol.x
        state.kkt_norm = kkt_residual(
            sol, self.xmin, self.xmax, df0dx, fval, dfdx, self.a0, self.a, self.c, self.d
        )
        state.max_slack = float(np.max(sol.y)) if self.m else 0.0
        if state.max_slack > RELAXATION_TOL:
            logger.warning(
                f"MMA iteration {state.iteration}: constraints relaxed, max slack "
                f"{state.max_slack:.3e} with penalty c={float(self.c.max()):g}"
            )
        return sol.x.ravel(), sol.y.ravel()

    def _asymptotes(self, state: MMAState, xval: np.ndarray):
        span = self.xmax - self.xmin
        if state.iteration <= 2:
            low = xval - ASYINIT * span
            upp = xval + ASYINIT * span
        else:
            trend = (xval - state.x_old1) * (state.x_old1 - state.x_old2)
            factor = np.ones_like(xval)
            factor[trend > 0] = ASYINCR
            factor[trend < 0] = ASYDECR
            low = xval - factor * (state.x_old1 - state.low)
            upp = xval + factor * (state.upp - state.x_old1)
            low = np.clip(low, xval - 10.0 * span, xval - 0.01 * span)
            upp = np.clip(upp, xval + 0.01 * span, xval + 10.0 * span)

        alfa = np.maximum(np.maximum(low + ALBEFA * (xval - low), xval - self.move * span), self.xmin)
        beta = np.minimum(np.minimum(upp - ALBEFA * (upp - xval), xval + self.move * span), self.xmax)
        return low, upp, alfa, beta

    def _approximation(self, xval, low, upp, df0dx, fval, dfdx):
        span_inv = 1.0 / np.maximum(self.xmax - self.xmin, 1e-5)
        ux2 = (upp - xval) ** 2
        xl2 = (xval - low) ** 2

        p0 = np.maximum(df0dx, 0.0)
        q0 = np.maximum(-df0dx, 0.0)
        pq0 = 0.001 * (p0 + q0) + RAA0 * span_inv
        p0 = (p0 + pq0) * ux2
        q0 = (q0 + pq0) * xl2

        p = np.maximum(dfdx, 0.0)
        q = np.maximum(-dfdx, 0.0)
        pq = 0.001 * (p + q) + RAA0 * span_inv.T
        p = (p + pq) * ux2.T
        q = (q + pq) * xl2.T
        b = p @ (1.0 / (upp - xval)) + q @ (1.0 / (xval - low)) - fval
        return p0, q0, p, q, b


def _residual(m, n, x, y, z, lam, xsi, eta, mu, zet, s, low, upp, alfa, beta, p0, q0, p, q, a0, a, b, c, d, epsi):
    ux1 = upp - x
    xl1 = x - low
    plam = p0 + p.T @ lam
    qlam = q0 + q.T @ lam
    gvec = p @ (1.0 / ux1) + q @ (1.0 / xl1)
    dpsidx = plam / ux1**2 - qlam / xl1**2
    residual = np.concatenate(
        (
            dpsidx - xsi + eta,
            c + d * y - mu - lam,
            np.array([[a0 - zet - (a.T @ lam).item()]]),
            gvec - a * z - y + s - b,
            xsi * (x - alfa) - epsi,
            eta * (beta - x) - epsi,
            mu * y - epsi,
            np.array([[zet * z - epsi]]),
            lam * s - epsi,
        )
    )
    return residual


def _subsolv(m, n, low, upp, alfa, beta, p0, q0, p, q, a0, a, b, c, d) -> SubproblemSolution:
    """Primal-dual Newton solve of the convex MMA subproblem."""
    een = np.ones((n, 1))
    eem = np.ones((m, 1))
    epsi = 1.0
    x = 0.5 * (alfa + beta)
    y = eem.copy()
    z = 1.0
    lam = eem.copy()
    xsi = np.maximum(een / (x - alfa), een)
    eta = np.maximum(een / (beta - x), een)
    mu = np.maximum(eem, 0.5 * c)
    zet = 1.0
    s = eem.copy()

    def residual_of(x, y, z, lam, xsi, eta, mu, zet, s):
        return _residual(m, n, x, y, z, lam, xsi, eta, mu, zet, s, low, upp, alfa, beta,
                         p0, q0, p, q, a0, a, b, c, d, epsi)

    while epsi > EPSIMIN:
        residu = residual_of(x, y, z, lam, xsi, eta, mu, zet, s)
        residunorm = np.linalg.norm(residu)
        residumax = np.max(np.abs(residu))
        inner = 0
        while residumax > 0.9 * epsi and inner < _SUBSOLV_MAX_INNER:
            inner += 1
            ux1 = upp - x
            xl1 = x - low
            ux2 = ux1 * ux1
            xl2 = xl1 * xl1
            plam = p0 + p.T @ lam
            qlam = q0 + q.T @ lam
            gvec = p @ (1.0 / ux1) + q @ (1.0 / xl1)
            gg = p / ux2.T - q / xl2.T
            dpsidx = plam / ux2 - qlam / xl2
            delx = dpsidx - epsi / (x - alfa) + epsi / (beta - x)
            dely = c + d * y - lam - epsi / y
            delz = a0 - (a.T @ lam).item() - epsi / z
            dellam = gvec - a * z - y - b + epsi / lam
            diagx = 2.0 * (plam / (ux2 * ux1) + qlam / (xl2 * xl1)) + xsi / (x - alfa) + eta / (beta - x)
            diagy = d + mu / y
            diaglamyi = s / lam + 1.0 / diagy

            if m < n:
                blam = dellam + dely / diagy - gg @ (delx / diagx)
                alam = np.diag(diaglamyi.ravel()) + (gg / diagx.T) @ gg.T
                lhs = np.block([[alam, a], [a.T, np.array([[-zet / z]])]])
                rhs = np.concatenate((blam, np.array([[delz]])))
                solution = scipy.linalg.solve(lhs, rhs)
                dlam = solution[:m]
                dz = float(solution[m, 0])
                dx = -delx / diagx - (gg.T @ dlam) / diagx
            else:
                dellamyi = dellam + dely / diagy
                axx = np.diag(diagx.ravel()) + gg.T @ (gg / diaglamyi)
                azz = zet / z + (a.T @ (a / diaglamyi)).item()
                axz = -gg.T @ (a / diaglamyi)
                bx = delx + gg.T @ (dellamyi / diaglamyi)
                bz = delz - (a.T @ (dellamyi / diaglamyi)).item()
                lhs = np.block([[axx, axz], [axz.T, np.array([[azz]])]])
                rhs = -np.concatenate((bx, np.array([[bz]])))
                solution = scipy.linalg.solve(lhs, rhs)
                dx = solution[:n]
                dz = float(solution[n, 0])
                dlam = gg @ dx / diaglamyi - dz * (a / diaglamyi) + dellamyi / diaglamyi

            dy = -dely / diagy + dlam / diagy
            dxsi = -xsi + epsi / (x - alfa) - (xsi * dx) / (x - alfa)
            deta = -eta + epsi / (beta - x) + (eta * dx) / (beta - x)
            dmu = -mu + epsi / y - (mu * dy) / y
            dzet = -zet + epsi / z - zet * dz / z
            ds = -s + epsi / lam - (s * dlam) / lam

            stacked = np.concatenate((y, [[z]], lam, xsi, eta, mu, [[zet]], s))
            dstacked = np.concatenate((dy, [[dz]], dlam, dxsi, deta, dmu, [[dzet]], ds))
            step_inv = max(
                np.max(-1.01 * dstacked / stacked),
                np.max(-1.01 * dx / (x - alfa)),
                np.max(1.01 * dx / (beta - x)),
                1.0,
            )
            step = 1.0 / step_inv

            start = (x, y, z, lam, xsi, eta, mu, zet, s)
            resinew = 2.0 * residunorm
            tries = 0
            while resinew > residunorm and tries < _SUBSOLV_MAX_LINE_SEARCH:
                tries += 1
                x = start[0] + step * dx
                y = start[1] + step * dy
                z = start[2] + step * dz
                lam = start[3] + step * dlam
                xsi = start[4] + step * dxsi
                eta = start[5] + step * deta
                mu = start[6] + step * dmu
                zet = start[7] + step * dzet
                s = start[8] + step * ds
                residu = residual_of(x, y, z, lam, xsi, eta, mu, zet, s)
                resinew = np.linalg.norm(residu)
                step /= 2.0
            residunorm = resinew
            residumax = np.max(np.abs(residu))
        epsi *= 0.1

    return SubproblemSolution(x=x, y=y, z=z, lam=lam, xsi=xsi, eta=eta, mu=mu, zet=zet, s=s)


def kkt_residual(
    sol: SubproblemSolution,
    xmin: np.ndarray,
    xmax: np.ndarray,
    df0dx: np.ndarray,
    fval: np.ndarray,
    dfdx: np.ndarray,
    a0: float,
    a: np.ndarray,
    c: np.ndarray,
    d: np.ndarray,
) -> float:
    """Euclidean norm of the KKT residual of the original problem at a subproblem solution."""
    residual = np.concatenate(
        (
            df0dx + dfdx.T @ sol.lam - sol.xsi + sol.eta,
            c + d * sol.y - sol.mu - sol.lam,
            np.array([[a0 - sol.zet - (a.T @ sol.lam).item()]]),
            fval - a * sol.z - sol.y + sol.s,
            sol.xsi * (sol.x - xmin),
            sol.eta * (xmax - sol.x),
            sol.mu * sol.y,
            np.array([[sol.zet * sol.z]]),
            sol.lam * sol.s,
        )
    )
    return float(np.linalg.norm(residual))
