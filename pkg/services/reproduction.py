import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from functions.errors import InlineCheckFailed, InvalidParameter
from services.fisher_info import information_budget, oracle_deviation, qfi_joint, qfi_postselected
from services.phase_dist import (DEFAULT_N_COARSE, DEFAULT_N_PHI, find_peaks, phase_density,
                                 phase_density_closed_form, phase_profile, taylor_shift_check)
from services.protocol import ProtocolParams, build_cat, success_probability
from services.report_writer import write_table
from services.spin_core import (BlochAngles, cat_component_overlap, coherent_state,
                                inner_product, overlap_ratio, spin_from_atoms)
from services.wigner_dist import decompose, negativity_volume, sample_grid

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_OMEGA = math.pi / 100.0
DEFAULT_GAMMAS = (math.pi / 2.0, math.pi / 30.0, math.pi / 60.0, math.pi / 100.0, 0.0)
REFERENCE_GAMMA = math.pi / 100.0
WIGNER_ATOMS = (10,)
PHASE_ATOMS = (10, 100)
FISHER_ATOMS = (100,)
SHIFT_GAMMA_POINTS = 50
FISHER_GAMMA_POINTS = 51

INTEGRAL_TOLERANCE = 1e-8
ROUTE_TOLERANCE = 1e-10
FISHER_ORACLE_TOLERANCE = 1e-4


@dataclass
class RunConfig:
    """Parameters of one reproduction run; angles are in radians"""
    command: str
    n_atoms: Optional[List[int]] = None
    omega: float = DEFAULT_OMEGA
    gammas: Optional[List[float]] = None
    out_dir: str = "output"
    fmt: str = "csv"
    n_alpha: Optional[int] = None
    n_beta: Optional[int] = None
    check: bool = False
    n_coarse: int = DEFAULT_N_COARSE
    n_phi: int = DEFAULT_N_PHI
    gamma_points: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def atoms_or(self, default):
        return list(self.n_atoms) if self.n_atoms else list(default)

    def header(self):
        """Run parameters recorded at the top of every output file"""
        values = {k: v for k, v in asdict(self).items() if v is not None and k not in ("extra", "out_dir")}
        values.update(self.extra)
        return values


def _path(config, name):
    return os.path.join(config.out_dir, name)


def _gamma_label(gamma):
    return f"{gamma:.6f}"


def run_wigner(config):
    """
    Wigner functions of the initial coherent state and of the cat states.

    Without explicit gammas the coherent-state panel and the five default
    gammas are produced. Returns the list of written files.
    """
    written = []
    summary = []
    with_coherent = config.gammas is None
    gammas = list(config.gammas) if config.gammas is not None else list(DEFAULT_GAMMAS)

    for n in config.atoms_or(WIGNER_ATOMS):
        spin = spin_from_atoms(n)
        n_alpha = config.n_alpha if config.n_alpha is not None else max(30, spin.two_j + 2)
        n_beta = config.n_beta if config.n_beta is not None else max(60, 2 * spin.two_j + 2)

        # Step 1: collect the states to sample
        panels = []
        if with_coherent:
            panels.append(("coherent", float("nan"), coherent_state(spin, BlochAngles(math.pi / 2.0, 0.0))))
        for gamma in gammas:
            params = ProtocolParams.equatorial(n, config.omega, gamma)
            panels.append(("cat", gamma, build_cat(params).vector))
        logger.info(f"Sampling {len(panels)} Wigner panels for N = {n} on a {n_alpha} x {n_beta} grid")

        # Step 2: sample each state and write its (alpha, beta, W) table
        for panel, gamma, state in panels:
            grid = sample_grid(decompose(state), n_alpha, n_beta)
            integral = grid.integral()
            volume = negativity_volume(grid)
            label = panel if panel == "coherent" else f"gamma{_gamma_label(gamma)}"
            written.append(write_table(_path(config, f"wigner_N{n}_{label}"), "wigner",
                                       {**config.header(), "panel": panel, "panel_gamma": gamma, "panel_n": n},
                                       ("alpha", "beta", "W"), grid.triples(), config.fmt))
            logger.info(f"N = {n} {label}: min W = {grid.min_value:.6e}, "
                        f"negativity volume = {volume:.6e}, integral = {integral:.12f}")
            if config.check and abs(integral - 1.0) > INTEGRAL_TOLERANCE:
                raise InlineCheckFailed(f"Wigner integral {integral} for N = {n} {label}")
            summary.append((panel, n, gamma, grid.min_value, volume, integral))

    # Step 3: summary table
    written.append(write_table(_path(config, "wigner_summary"), "wigner", config.header(),
                               ("panel", "n_atoms", "gamma", "min_w", "negativity_volume", "integral"),
                               summary, config.fmt))
    return written


def run_phase(config):
    """P(phi) curves, one file per atom count, plus the peak summary"""
    written = []
    summary = []
    gammas = list(config.gammas) if config.gammas is not None else list(DEFAULT_GAMMAS)

    for n in config.atoms_or(PHASE_ATOMS):
        rows = []
        for gamma in gammas:
            params = ProtocolParams.equatorial(n, config.omega, gamma)
            profile = phase_profile(params, n_phi=config.n_phi)
            rows.extend((gamma, phi, value) for phi, value in zip(profile.phis, profile.values))

            if config.check:
                _check_phase_routes(params, profile)

            if config.omega != 0.0:
                report = find_peaks(params, n_coarse=config.n_coarse)
                summary.append((n, gamma, report.n_peaks, report.left_peak_phi,
                                report.scaled_shift, report.dip_at_zero))
                logger.info(f"N = {n}, gamma = {gamma:.6g}: {report.n_peaks} peak(s), "
                            f"scaled shift {report.scaled_shift:.4f}, dip at zero: {report.dip_at_zero}")
        written.append(write_table(_path(config, f"phase_N{n}"), "phase", {**config.header(), "panel_n": n},
                                   ("gamma", "phi", "P"), rows, config.fmt))

    if summary:
        written.append(write_table(_path(config, "phase_summary"), "phase", config.header(),
                                   ("n_atoms", "gamma", "n_peaks", "left_peak_phi", "scaled_shift", "dip_at_zero"),
                                   summary, config.fmt))
    else:
        logger.info("omega = 0: every curve is the initial state's, no peak summary written")
    return written


def _check_phase_routes(params, profile):
    """Closed form against the explicit cat vector on a sub-sample of the profile"""
    sample = profile.phis[::max(1, len(profile.phis) // 50)]
    closed = profile.values[::max(1, len(profile.phis) // 50)]
    vector = phase_density(params, sample)
    deviation = float(np.max(np.abs(closed - vector))) / max(float(np.max(profile.values)), 1e-300)
    logger.debug(f"Phase route deviation {deviation:.3e} at gamma = {params.gamma:.6g}")
    if deviation > ROUTE_TOLERANCE:
        raise InlineCheckFailed(f"phase density routes differ by {deviation:.3e} at gamma = {params.gamma}")


def shift_sweep(config):
    points = config.gamma_points or SHIFT_GAMMA_POINTS
    if points == 1:
        return [math.pi / 2.0]
    return list(np.linspace(REFERENCE_GAMMA, math.pi / 2.0, points))


def run_shift(config):
    """Scaled left-peak shift against gamma, with the weak-value prediction next to it"""
    if config.omega == 0.0:
        raise InvalidParameter("peak shift needs omega != 0")
    gammas = list(config.gammas) if config.gammas is not None else shift_sweep(config)
    for gamma in gammas:
        if not 0.0 < gamma <= math.pi / 2.0:
            raise InvalidParameter(f"shift sweep needs gamma in (0, pi/2], got {gamma}")

    rows = []
    summary = []
    for n in config.atoms_or(PHASE_ATOMS):
        logger.info(f"Shift sweep over {len(gammas)} gammas for N = {n}")
        for gamma in gammas:
            params = ProtocolParams.equatorial(n, config.omega, gamma)
            report = find_peaks(params, n_coarse=config.n_coarse)
            check = taylor_shift_check(params, n_coarse=config.n_coarse)
            rows.append((n, gamma, report.scaled_shift, check.true_shift, check.predicted_shift,
                         check.relative_error, report.n_peaks))
            if config.check:
                _check_peak_route(params, report)

        # headline number at gamma = pi/100
        reference = find_peaks(ProtocolParams.equatorial(n, config.omega, REFERENCE_GAMMA),
                               n_coarse=config.n_coarse)
        summary.append((n, REFERENCE_GAMMA, reference.scaled_shift))
        logger.info(f"N = {n}: scaled shift at gamma = pi/100 is {reference.scaled_shift:.4f}")

    return [
        write_table(_path(config, "shift"), "shift", config.header(),
                    ("n_atoms", "gamma", "scaled_shift", "true_shift", "predicted_shift",
                     "relative_error", "n_peaks"), rows, config.fmt),
        write_table(_path(config, "shift_summary"), "shift", config.header(),
                    ("n_atoms", "gamma", "scaled_shift"), summary, config.fmt),
    ]


def _check_peak_route(params, report):
    closed = float(phase_density_closed_form(params, report.left_peak_phi))
    vector = phase_density(params, report.left_peak_phi)
    if abs(closed - vector) > ROUTE_TOLERANCE * max(abs(closed), 1e-300):
        raise InlineCheckFailed(f"P at the left peak differs between routes: {closed} vs {vector}")


def fisher_sweep(config):
    points = config.gamma_points or FISHER_GAMMA_POINTS
    if points == 1:
        return [math.pi / 4.0]
    return list(np.linspace(0.0, math.pi / 2.0, points))


def run_fisher(config):
    """I, p and F_p against gamma for each atom count"""
    gammas = list(config.gammas) if config.gammas is not None else fisher_sweep(config)
    written = []
    worst = 0.0

    for n in config.atoms_or(FISHER_ATOMS):
        rows = []
        for gamma in gammas:
            p = success_probability(n, config.omega, gamma)
            budget = information_budget(n, config.omega, gamma)
            rows.append((gamma, qfi_postselected(n, config.omega, gamma), p, budget.f_post,
                         budget.p_times_i, budget.total))
            if config.check:
                worst = max(worst, oracle_deviation(n, config.omega, gamma))

        i_joint = qfi_joint(n)
        logger.info(f"N = {n}: joint QFI {i_joint:.1f}, {len(rows)} gamma points, "
                    f"max p I = {max(r[4] for r in rows):.6g}")
        written.append(write_table(_path(config, f"fisher_N{n}"), "fisher",
                                   {**config.header(), "panel_n": n, "i_joint": i_joint},
                                   ("gamma", "I", "p", "F_p", "pI", "pI_plus_F_p"), rows, config.fmt))

    if config.check:
        logger.info(f"Fisher oracles: max relative deviation {worst:.3e}")
        if worst > FISHER_ORACLE_TOLERANCE:
            raise InlineCheckFailed(f"Fisher closed forms deviate from their oracles by {worst:.3e}")
    return written


def run_overlap(config):
    """Overlap of the two cat components for each atom count, and the ratio of the first two"""
    atoms = config.atoms_or(PHASE_ATOMS)
    rows = []
    for n in atoms:
        spin = spin_from_atoms(n)
        value = cat_component_overlap(spin, config.omega)
        if config.check:
            explicit = abs(inner_product(coherent_state(spin, BlochAngles(math.pi / 2.0, config.omega)),
                                         coherent_state(spin, BlochAngles(math.pi / 2.0, -config.omega))))**2
            if abs(explicit - value) > ROUTE_TOLERANCE:
                raise InlineCheckFailed(f"overlap law {value} vs explicit states {explicit} at N = {n}")
        rows.append((n, spin.j, value))
        logger.info(f"N = {n}: component overlap {value:.6f}")

    written = [write_table(_path(config, "overlap"), "overlap", config.header(),
                           ("n_atoms", "j", "overlap"), rows, config.fmt)]
    if len(atoms) >= 2:
        ratio = overlap_ratio(spin_from_atoms(atoms[0]), spin_from_atoms(atoms[1]), config.omega)
        logger.info(f"Overlap ratio N = {atoms[0]} / N = {atoms[1]}: {ratio:.6f}")
        written.append(write_table(_path(config, "overlap_summary"), "overlap", config.header(),
                                   ("n_atoms_a", "n_atoms_b", "ratio"), [(atoms[0], atoms[1], ratio)],
                                   config.fmt))
    return written


WORKFLOWS = {
    "wigner": run_wigner,
    "phase": run_phase,
    "shift": run_shift,
    "fisher": run_fisher,
    "overlap": run_overlap,
}


def run(config):
    """Dispatch a RunConfig to its workflow"""
    if config.command not in WORKFLOWS:
        raise InvalidParameter(f"unknown command {config.command!r}")
    logger.info(f"Running {config.command} into {config.out_dir}")
    return WORKFLOWS[config.command](config)
