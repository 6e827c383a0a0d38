"""Sparse geometric THz MIMO channel model.

Each hop (BS->RIS, RIS->MS, and the blocked direct BS->MS baseline) is a sum
of one optional LoS path and L reflected paths:

    H = sqrt(N_tx N_rx) a0 a_rx a_tx^H + sqrt(N_tx N_rx / L) sum_l a_l a_rx,l a_tx,l^H

with unit-norm UPA steering vectors, free-space spreading plus molecular
absorption on the LoS gain, and an additional material reflection coefficient
on each reflected path. Propagation phases carry e^{-j 2 pi f tau} with the
package-wide e^{+j omega t} convention.

A realization is fully determined by its path list, so every sampled matrix
can be reconstructed exactly from the emitted `PathParams` (that is also the
channel-dump replay contract).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .graphene import SPEED_OF_LIGHT

if TYPE_CHECKING:  # pragma: no cover
    from .harness import ExperimentConfig


class ArrayRole(Enum):
    BS_UPA = "bs"
    MS_UPA = "ms"
    RIS_UPA = "ris"


class Hop(Enum):
    BS_RIS = "h1"
    RIS_MS = "h2"
    BS_MS_DIRECT = "direct"


class PathKind(Enum):
    LOS = "LoS"
    NLOS = "NLoS"


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array on the xy-plane, n_x by n_y elements."""

    n_x: int
    n_y: int
    element_spacing_m: float
    role: ArrayRole

    def __post_init__(self):
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("array dimensions must be >= 1")
        if self.element_spacing_m <= 0:
            raise ValueError("element_spacing_m must be > 0")

    @property
    def size(self) -> int:
        return self.n_x * self.n_y


@dataclass(frozen=True)
class PathParams:
    """One propagation path: geometry angles, complex gain, absolute delay."""

    kind: PathKind
    aoa_azimuth_rad: float
    aoa_elevation_rad: float
    aod_azimuth_rad: float
    aod_elevation_rad: float
    complex_gain: complex
    delay_s: float


@dataclass(frozen=True)
class LinkGeometry:
    """Propagation parameters of one hop."""

    carrier_freq_Hz: float
    distance_m: float
    absorption_coeff_per_m: float = 0.2
    reflection_coeff: float = 1e-6
    n_nlos_paths: int = 2
    nlos_excess_range_m: tuple = (1.0, 10.0)

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError("distance_m must be > 0")
        if self.absorption_coeff_per_m < 0:
            raise ValueError("absorption_coeff_per_m must be >= 0")
        if not 0.0 <= self.reflection_coeff <= 1.0:
            raise ValueError("reflection_coeff must lie in [0, 1]")
        if self.n_nlos_paths < 0:
            raise ValueError("n_nlos_paths must be >= 0")


@dataclass(frozen=True)
class ChannelRealization:
    """Both hop matrices of one Monte-Carlo draw plus their path lists."""

    h1: np.ndarray          # N_RIS x N_BS
    h2: np.ndarray          # N_MS x N_RIS
    paths_h1: tuple
    paths_h2: tuple
    seed: int


def upa_dims(n_elements: int) -> tuple:
    """Near-square (n_x, n_y) factorization with n_x >= n_y."""
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    n_y = int(math.isqrt(n_elements))
    while n_elements % n_y:
        n_y -= 1
    return n_elements // n_y, n_y


def upa_response(geom: ArrayGeometry, azimuth_rad: float, elevation_rad: float,
                 wavelength_m: float) -> np.ndarray:
    """Normalized UPA steering vector, flattened p-major (p over n_x, q over n_y).

    Entry (p, q) is exp(j 2 pi d/lambda (p sin(el) cos(az) + q cos(el))) / sqrt(N).
    """
    if wavelength_m <= 0:
        raise ValueError("wavelength_m must be > 0")
    p = np.arange(geom.n_x)[:, None]
    q = np.arange(geom.n_y)[None, :]
    scale = 2.0 * math.pi * geom.element_spacing_m / wavelength_m
    phase = scale * (p * (math.sin(elevation_rad) * math.cos(azimuth_rad))
                     + q * math.cos(elevation_rad))
    return np.exp(1j * phase).ravel() / math.sqrt(geom.size)


def los_gain(link: LinkGeometry) -> complex:
    """LoS complex gain: spreading loss, molecular absorption, delay phase."""
    f = link.carrier_freq_Hz
    r0 = link.distance_m
    tau_los = r0 / SPEED_OF_LIGHT
    mag = (SPEED_OF_LIGHT / (4.0 * math.pi * f * r0)
           * math.exp(-0.5 * link.absorption_coeff_per_m * r0))
    return mag * np.exp(-2j * math.pi * f * tau_los)


def nlos_gain(link: LinkGeometry, r1_m: float, r2_m: float) -> complex:
    """Reflected-path complex gain for a detour of r1 + r2 meters.

    The reflection coefficient of the scattering material multiplies the
    spreading/absorption loss; the delay phase uses the excess path length.
    """
    detour = r1_m + r2_m
    if detour < link.distance_m:
        raise ValueError("r1 + r2 must be >= the direct distance")
    f = link.carrier_freq_Hz
    tau_ref = link.distance_m / SPEED_OF_LIGHT + (detour - link.distance_m) / SPEED_OF_LIGHT
    mag = (SPEED_OF_LIGHT * link.reflection_coeff / (4.0 * math.pi * f * detour)
           * math.exp(-0.5 * link.absorption_coeff_per_m * detour))
    return mag * np.exp(-2j * math.pi * f * tau_ref)


def reconstruct_channel(paths, rx_geom: ArrayGeometry, tx_geom: ArrayGeometry,
                        wavelength_m: float) -> np.ndarray:
    """Assemble the hop matrix from its path list (the defining model sum)."""
    n_rx, n_tx = rx_geom.size, tx_geom.size
    n_nlos = sum(1 for p in paths if p.kind is PathKind.NLOS)
    h = np.zeros((n_rx, n_tx), dtype=complex)
    for p in paths:
        if p.kind is PathKind.LOS:
            weight = math.sqrt(n_tx * n_rx)
        else:
            weight = math.sqrt(n_tx * n_rx / n_nlos)
        a_rx = upa_response(rx_geom, p.aoa_azimuth_rad, p.aoa_elevation_rad, wavelength_m)
        a_tx = upa_response(tx_geom, p.aod_azimuth_rad, p.aod_elevation_rad, wavelength_m)
        h += weight * p.complex_gain * np.outer(a_rx, a_tx.conj())
    return h


def _draw_path_angles(rng) -> tuple:
    aoa_az = rng.uniform(0.0, 2.0 * math.pi)
    aoa_el = rng.uniform(0.0, math.pi)
    aod_az = rng.uniform(0.0, 2.0 * math.pi)
    aod_el = rng.uniform(0.0, math.pi)
    return aoa_az, aoa_el, aod_az, aod_el


def sample_paths(link: LinkGeometry, rng, include_los: bool = True) -> tuple:
    """Draw the path list of one hop.

    Angles are uniform over the sphere sectors (azimuth in [0, 2pi), elevation
    in [0, pi)). Reflected-path detours split the direct distance at a uniform
    fraction in (0.3, 0.7) and add a uniform excess from nlos_excess_range_m.
    """
    paths = []
    if include_los:
        gain = los_gain(link)
        paths.append(PathParams(PathKind.LOS, *_draw_path_angles(rng),
                                complex_gain=complex(gain),
                                delay_s=link.distance_m / SPEED_OF_LIGHT))
    lo, hi = link.nlos_excess_range_m
    for _ in range(link.n_nlos_paths):
        angles = _draw_path_angles(rng)
        u = rng.uniform(0.3, 0.7)
        excess = rng.uniform(lo, hi)
        r1 = link.distance_m * u
        r2 = link.distance_m * (1.0 - u) + excess
        gain = nlos_gain(link, r1, r2)
        delay = (link.distance_m + (r1 + r2 - link.distance_m)) / SPEED_OF_LIGHT
        paths.append(PathParams(PathKind.NLOS, *angles,
                                complex_gain=complex(gain), delay_s=delay))
    return tuple(paths)


def hop_arrays(config: "ExperimentConfig", hop: Hop) -> tuple:
    """(rx_geom, tx_geom) for a hop under the configured terminal sizes.

    BS/MS arrays use half-wavelength spacing; the RIS spacing is the side
    length of one reflecting element.
    """
    lam = SPEED_OF_LIGHT / config.carrier_freq_Hz
    bs = ArrayGeometry(*upa_dims(config.n_bs), element_spacing_m=lam / 2,
                       role=ArrayRole.BS_UPA)
    ms = ArrayGeometry(*upa_dims(config.n_ms), element_spacing_m=lam / 2,
                       role=ArrayRole.MS_UPA)
    ris = ArrayGeometry(*upa_dims(config.n_ris),
                        element_spacing_m=config.ris_element_period_m,
                        role=ArrayRole.RIS_UPA)
    if hop is Hop.BS_RIS:
        return ris, bs
    if hop is Hop.RIS_MS:
        return ms, ris
    return ms, bs


def hop_link(config: "ExperimentConfig", hop: Hop) -> LinkGeometry:
    distance = {Hop.BS_RIS: config.bs_ris_m,
                Hop.RIS_MS: config.ris_ms_m,
                Hop.BS_MS_DIRECT: config.bs_ms_m}[hop]
    n_nlos = config.n_nlos_direct if hop is Hop.BS_MS_DIRECT else config.n_nlos
    return LinkGeometry(carrier_freq_Hz=config.carrier_freq_Hz,
                        distance_m=distance,
                        absorption_coeff_per_m=config.kappa_per_m,
                        reflection_coeff=config.xi,
                        n_nlos_paths=n_nlos,
                        nlos_excess_range_m=config.nlos_excess_range_m)


def sample_channel(config: "ExperimentConfig", hop: Hop, rng) -> tuple:
    """Sample one hop matrix; returns (matrix, path list).

    The direct BS->MS hop has its LoS blocked and carries reflected paths
    only. Deterministic given the RNG stream; the matrix equals
    `reconstruct_channel` applied to the returned paths.
    """
    link = hop_link(config, hop)
    include_los = hop is not Hop.BS_MS_DIRECT
    paths = sample_paths(link, rng, include_los=include_los)
    rx_geom, tx_geom = hop_arrays(config, hop)
    lam = SPEED_OF_LIGHT / config.carrier_freq_Hz
    return reconstruct_channel(paths, rx_geom, tx_geom, lam), paths


# --- channel dump / replay -------------------------------------------------

def dump_realization(real: ChannelRealization, config: "ExperimentConfig",
                     path) -> None:
    """Write one realization as plain text: geometry header plus one row per
    path (kind, four angles, gain re/im, delay). Enables exact replay."""
    lam = SPEED_OF_LIGHT / config.carrier_freq_Hz
    lines = ["# thzris channel dump v1",
             f"seed {real.seed}",
             f"carrier_freq_hz {config.carrier_freq_Hz!r}"]
    for tag, hop in (("h1", Hop.BS_RIS), ("h2", Hop.RIS_MS)):
        rx, tx = hop_arrays(config, hop)
        lines.append(f"{tag}_rx_geom {rx.n_x} {rx.n_y} {rx.element_spacing_m!r} {rx.role.value}")
        lines.append(f"{tag}_tx_geom {tx.n_x} {tx.n_y} {tx.element_spacing_m!r} {tx.role.value}")
    for tag, paths in (("h1", real.paths_h1), ("h2", real.paths_h2)):
        lines.append(f"paths_{tag} {len(paths)}")
        for p in paths:
            lines.append(" ".join([p.kind.value,
                                   repr(p.aoa_azimuth_rad), repr(p.aoa_elevation_rad),
                                   repr(p.aod_azimuth_rad), repr(p.aod_elevation_rad),
                                   repr(p.complex_gain.real), repr(p.complex_gain.imag),
                                   repr(p.delay_s)]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_realization(path) -> ChannelRealization:
    """Parse a channel dump and rebuild both hop matrices from the paths."""
    with open(path, "r", encoding="utf-8") as fh:
        rows = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    header = {}
    paths = {"h1": [], "h2": []}
    i = 0
    while i < len(rows):
        key, *vals = rows[i].split()
        if key.startswith("paths_"):
            tag, count = key[len("paths_"):], int(vals[0])
            for j in range(count):
                tok = rows[i + 1 + j].split()
                kind = PathKind.LOS if tok[0] == "LoS" else PathKind.NLOS
                paths[tag].append(PathParams(
                    kind, float(tok[1]), float(tok[2]), float(tok[3]), float(tok[4]),
                    complex_gain=complex(float(tok[5]), float(tok[6])),
                    delay_s=float(tok[7])))
            i += 1 + count
        else:
            header[key] = vals
            i += 1
    lam = SPEED_OF_LIGHT / float(header["carrier_freq_hz"][0])
    geoms = {}
    for tag in ("h1_rx_geom", "h1_tx_geom", "h2_rx_geom", "h2_tx_geom"):
        nx, ny, spacing, role = header[tag]
        geoms[tag] = ArrayGeometry(int(nx), int(ny), float(spacing), ArrayRole(role))
    h1 = reconstruct_channel(paths["h1"], geoms["h1_rx_geom"], geoms["h1_tx_geom"], lam)
    h2 = reconstruct_channel(paths["h2"], geoms["h2_rx_geom"], geoms["h2_tx_geom"], lam)
    return ChannelRealization(h1=h1, h2=h2, paths_h1=tuple(paths["h1"]),
                              paths_h2=tuple(paths["h2"]),
                              seed=int(header["seed"][0]))
