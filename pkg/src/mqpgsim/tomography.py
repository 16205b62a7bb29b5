"""Detector tomography by constrained weighted least squares."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .alphabets import mub_bases, require_odd_prime
from .mqpg import PovmElement


@dataclass(frozen=True, eq=False)
class ProbeSet:
    """All ``d(d+1)`` MUB eigenstates, grouped by basis.

    ``states[n]`` is a coefficient vector and ``labels[n] = (basis, index)``.
    """

    dimension: int
    states: np.ndarray = field(repr=False)
    labels: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.labels)

    def group(self, basis: int) -> np.ndarray:
        """Column indices of the probes belonging to ``basis``."""
        return np.array([n for n, (b, _) in enumerate(self.labels) if b == basis])

    def density_matrices(self) -> np.ndarray:
        return np.einsum("ni,nj->nij", self.states, self.states.conj())


def probe_set(d: int) -> ProbeSet:
    d = require_odd_prime(d)
    mubs = mub_bases(d)
    states = mubs.bases.reshape(d * (d + 1), d).copy()
    labels = tuple((b, m) for b in range(d + 1) for m in range(d))
    return ProbeSet(d, states, labels)


def forward_probabilities(povm, probes: ProbeSet) -> np.ndarray:
    """``p[g, n] = <xi_n| pi_g |xi_n>`` for each element and probe."""
    mats = [e.matrix if isinstance(e, PovmElement) else np.asarray(e) for e in povm]
    s = probes.states
    return np.array([np.einsum("ni,ij,nj->n", s.conj(), m, s).real for m in mats])


def hermitian_basis(d: int) -> np.ndarray:
    """Frobenius-orthonormal basis of d x d Hermitian matrices, shape ``(d^2, d, d)``."""
    out = []
    for i in range(d):
        e = np.zeros((d, d), complex)
        e[i, i] = 1.0
        out.append(e)
    r = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), complex)
            e[i, j] = e[j, i] = r
            out.append(e)
            e = np.zeros((d, d), complex)
            e[i, j] = 1j * r
            e[j, i] = -1j * r
            out.append(e)
    return np.array(out)


def project_psd(m: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) Hermitian PSD matrix, by eigenvalue clipping."""
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    out = (v * np.clip(w, 0.0, None)) @ v.conj().T
    return 0.5 * (out + out.conj().T)


@dataclass
class _Problem:
    design: np.ndarray  # (n_probes, d^2)
    basis: np.ndarray  # (d^2, d, d)
    p: np.ndarray
    w: np.ndarray

    def to_mat(self, x):
        return np.tensordot(x, self.basis, axes=1)

    def to_vec(self, m):
        return np.einsum("kij,ij->k", self.basis.conj(), m).real

    def project(self, x):
        return self.to_vec(project_psd(self.to_mat(x)))

    def objective(self, x):
        r = self.p - self.design @ x
        return float(np.sum(self.w * r * r))

    def gradient(self, x):
        r = self.p - self.design @ x
        return -2.0 * self.design.T @ (self.w * r)


@dataclass
class ChannelFit:
    matrix: np.ndarray
    objective: float
    iterations: int
    converged: bool
    history: list[float]


def _fit_channel(prob: _Problem, tol: float, max_iter: int) -> ChannelFit:
    sw = np.sqrt(prob.w)
    x_u = np.linalg.lstsq(sw[:, None] * prob.design, sw * prob.p, rcond=None)[0]
    m_u = prob.to_mat(x_u)
    m_u = 0.5 * (m_u + m_u.conj().T)
    w_u = np.linalg.eigvalsh(m_u)
    scale = max(float(np.abs(w_u).max()), 1e-300)
    if w_u.min() >= -1e-10 * scale:
        x = prob.project(x_u)
        f = prob.objective(x)
        return ChannelFit(prob.to_mat(x), f, 0, True, [f])

    # monotone spectral projected gradient from the clipped unconstrained fit
    lipschitz = 2.0 * np.linalg.eigvalsh((prob.design.T * prob.w) @ prob.design).max()
    t_min, t_max = 1e-12 / lipschitz, 1e12 / lipschitz
    x = prob.project(x_u)
    f = prob.objective(x)
    g = prob.gradient(x)
    t = 1.0 / lipschitz
    history = [f]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        step = prob.project(x - t * g) - x
        if np.linalg.norm(step) <= 1e-15 * (1.0 + np.linalg.norm(x)):
            converged = True
            break
        slope = float(g @ step)
        lam = 1.0
        for _ in range(60):
            x_new = x + lam * step
            f_new = prob.objective(x_new)
            if f_new <= f + 1e-4 * lam * slope:
                break
            lam *= 0.5
        else:
            converged = True  # no descent possible at machine precision
            break
        g_new = prob.gradient(x_new)
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        t = float(np.clip(s @ s / sy, t_min, t_max)) if sy > 0 else t_max
        change = f - f_new
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if change <= tol * f or f <= 1e-300:
            converged = True
            break
    return ChannelFit(project_psd(prob.to_mat(x)), f, it, converged, history)


@dataclass(eq=False)
class TomographyResult:
    povm: list[PovmElement]
    fidelities: np.ndarray | None
    residual: float
    iterations: int
    converged: bool
    histories: list[list[float]] = field(default_factory=list, repr=False)

    def mean_fidelity(self) -> float:
        if self.fidelities is None:
            raise ValueError("no target modes were given; fidelities unavailable")
        return float(np.mean(self.fidelities))

    def to_dict(self) -> dict:
        return {
            "povm": [{"re": e.matrix.real.tolist(), "im": e.matrix.imag.tolist()}
                     for e in self.povm],
            "fidelities": None if self.fidelities is None else [float(f) for f in self.fidelities],
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "TomographyResult":
        povm = [PovmElement(np.array(e["re"]) + 1j * np.array(e["im"])) for e in data["povm"]]
        fid = data.get("fidelities")
        return cls(povm, None if fid is None else np.array(fid), float(data["residual"]),
                   int(data["iterations"]), bool(data["converged"]))


def normalize_columns(probs) -> np.ndarray:
    """Per-probe normalization so each column sums to one."""
    p = np.asarray(probs, dtype=float)
    tot = p.sum(axis=0)
    if np.any(tot <= 0):
        raise ValueError("a probe state produced no counts in any channel")
    return p / tot


def reconstruct_povm(
    probs,
    probes: ProbeSet,
    tol: float = 1e-10,
    max_iter: int = 10000,
    weight_floor: float = 1e-6,
    targets=None,
    normalize: bool = False,
    basis_tag: str = "",
) -> TomographyResult:
    """Fit each channel's POVM element to ``p[g, n]`` independently.

    Minimizes ``sum_n |p - Tr(rho_n pi)|^2 / max(p, weight_floor * max_n p)``
    over Hermitian PSD ``pi``. ``probs`` has one row per channel and one
    column per probe. Non-convergence is reported through ``converged``.
    """
    p = np.asarray(probs, dtype=float)
    d = probes.dimension
    if p.ndim != 2 or p.shape[1] != len(probes):
        raise ValueError(f"probs must have shape (channels, {len(probes)}), got {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("probabilities must be finite and non-negative")
    if normalize:
        p = normalize_columns(p)
    basis = hermitian_basis(d)
    rhos = probes.density_matrices()
    design = np.einsum("nij,kji->nk", rhos, basis).real
    fits = []
    for row in p:
        floor = weight_floor * row.max() if row.max() > 0 else weight_floor
        w = 1.0 / np.maximum(row, floor)
        fits.append(_fit_channel(_Problem(design, basis, row, w), tol, max_iter))
    povm = [PovmElement(f.matrix, basis_tag) for f in fits]
    fids = None
    if targets is not None:
        fids = np.array([fidelity(e, t) for e, t in zip(povm, np.asarray(targets))])
    return TomographyResult(
        povm,
        fids,
        float(sum(f.objective for f in fits)),
        int(sum(f.iterations for f in fits)),
        all(f.converged for f in fits),
        [f.history for f in fits],
    )


def fidelity(pi, target) -> float:
    """``<g|pi|g> / Tr(pi)``."""
    m = pi.matrix if isinstance(pi, PovmElement) else np.asarray(pi)
    g = np.asarray(target, dtype=complex)
    if abs(np.vdot(g, g).real - 1.0) > 1e-8:
        raise ValueError("target must be normalized")
    tr = np.trace(m).real
    if tr <= 0:
        raise ValueError("POVM element has zero trace")
    return float(np.clip(np.vdot(g, m @ g).real / tr, 0.0, 1.0))


def crosstalk_matrix(probs) -> np.ndarray:
    """Column-normalized ``C[g, n] = p[g, n] / sum_g' p[g', n]``."""
    p = np.asarray(probs, dtype=float)
    tot = p.sum(axis=0)
    if np.any(tot <= 0):
        raise ValueError("crosstalk matrix undefined: a column sums to zero")
    return p / tot
