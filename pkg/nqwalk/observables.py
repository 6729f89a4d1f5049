import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy
import pandas
import scipy.signal
import xarray

from nqwalk.lattice import LatticeConfig, WalkerState, charge_density, total_charge
from nqwalk.nonlinear import WalkParams

logger = logging.getLogger(__name__)


def position_moments(
    densities: numpy.ndarray, positions: numpy.ndarray
) -> Tuple[numpy.ndarray, numpy.ndarray]:
    """Charge-weighted mean and standard deviation along the last axis."""
    charge = numpy.sum(densities, axis=-1)
    p = densities / charge[..., None]
    mean = p @ positions
    second = p @ (positions * positions)
    sigma = numpy.sqrt(numpy.maximum(second - mean * mean, 0.0))
    return mean, sigma


def position_stats(state: WalkerState) -> Tuple[float, float]:
    """Mean position and width sigma of the normalized charge distribution."""
    total_charge(state)
    mean, sigma = position_moments(
        charge_density(state), state.positions.astype(float)
    )
    return float(mean), float(sigma)


def localization_fraction(state: WalkerState, radius: int) -> float:
    """Fraction of the total charge within ``radius`` sites of the origin."""
    if isinstance(radius, bool) or not isinstance(radius, (int, numpy.integer)):
        raise TypeError("Type of radius must be int.")
    if radius < 0:
        raise ValueError("Localization radius must be nonnegative.")
    density = charge_density(state)
    inside = numpy.abs(state.positions) <= radius
    return float(numpy.sum(density[inside]) / numpy.sum(density))


def peak_positions(
    density, min_separation: int = 4, threshold_fraction: float = 0.1
) -> List[int]:
    """Site indices of the dominant local maxima of ``density``, ascending.

    Candidates are local maxima above ``threshold_fraction`` of the global
    maximum. They are accepted from the highest down (leftmost first on ties)
    and a candidate closer than ``min_separation`` sites to an accepted peak
    is dropped.
    """
    density = numpy.asarray(density, dtype=float)
    if min_separation < 1:
        raise ValueError("Peak separation must be a positive integer.")
    if not 0 < threshold_fraction < 1:
        raise ValueError("Peak threshold must be in (0, 1).")
    if density.size == 0 or not numpy.max(density) > 0:
        return []
    candidates, _ = scipy.signal.find_peaks(
        density, height=threshold_fraction * numpy.max(density)
    )
    order = sorted(candidates, key=lambda i: (-density[i], i))
    accepted = []
    for index in order:
        if all(abs(index - other) >= min_separation for other in accepted):
            accepted.append(int(index))
    return sorted(accepted)


def ranked_peaks(
    density, min_separation: int = 4, threshold_fraction: float = 0.1
) -> List[int]:
    """Like :func:`peak_positions` but ordered by decreasing height."""
    density = numpy.asarray(density, dtype=float)
    peaks = peak_positions(density, min_separation, threshold_fraction)
    return sorted(peaks, key=lambda i: (-density[i], i))


class RunRecord:
    """Per-step observables of one evolution, backed by an ``xarray.Dataset``.

    The dataset has a ``time`` dimension for the series ``mean_x``, ``sigma``,
    ``speed``, ``charge`` and optionally ``localization``, ``n_peaks`` and
    ``peak_x`` (with a ``peak`` dimension ordered by height). Snapshots of
    the charge density are stored as ``density`` over ``snapshot_time`` and
    ``x``.
    """

    def __init__(
        self, params: WalkParams, dataset: xarray.Dataset, metadata: Dict = None
    ) -> None:
        if not isinstance(params, WalkParams):
            raise TypeError("Type of params must be WalkParams.")
        if not isinstance(dataset, xarray.Dataset):
            raise TypeError("Type of dataset must be xarray.Dataset.")
        times = dataset["time"].values
        if numpy.any(numpy.diff(times) <= 0):
            raise ValueError("Record times must be strictly increasing.")
        if numpy.any(dataset["sigma"].values < 0):
            raise ValueError("Record sigma must be nonnegative.")
        self._params = params
        self._dataset = dataset
        self._metadata = dict(metadata or {})

    @property
    def params(self) -> WalkParams:
        return self._params

    @property
    def dataset(self) -> xarray.Dataset:
        return self._dataset

    @property
    def metadata(self) -> Dict:
        return self._metadata

    @property
    def times(self) -> numpy.ndarray:
        return self._dataset["time"].values

    @property
    def mean_x(self) -> numpy.ndarray:
        return self._dataset["mean_x"].values

    @property
    def sigma(self) -> numpy.ndarray:
        return self._dataset["sigma"].values

    @property
    def speed(self) -> numpy.ndarray:
        return self._dataset["speed"].values

    @property
    def charge(self) -> numpy.ndarray:
        return self._dataset["charge"].values

    @property
    def localization(self) -> Optional[numpy.ndarray]:
        if "localization" not in self._dataset:
            return None
        return self._dataset["localization"].values

    @property
    def n_peaks(self) -> Optional[numpy.ndarray]:
        if "n_peaks" not in self._dataset:
            return None
        return self._dataset["n_peaks"].values

    @property
    def snapshots(self) -> Dict[int, numpy.ndarray]:
        """Charge density per snapshot time."""
        if "density" not in self._dataset:
            return {}
        density = self._dataset["density"]
        return {
            int(t): density.sel(snapshot_time=t).values
            for t in density["snapshot_time"].values
        }

    def peak_sites(self, t: int) -> List[float]:
        """Peak positions at step ``t``, highest first."""
        if "peak_x" not in self._dataset:
            return []
        row = self._dataset["peak_x"].sel(time=t).values
        return [float(x) for x in row if not math.isnan(x)]

    def final_speed(self) -> float:
        return ballistic_speed(self, int(self.times[-1]))

    def stats_frame(self) -> pandas.DataFrame:
        return pandas.DataFrame(
            {
                "t": self.times,
                "mean_x": self.mean_x,
                "sigma": self.sigma,
                "speed": self.speed,
            }
        )

    def peaks_frame(self) -> pandas.DataFrame:
        rows = []
        origin = self._metadata.get("origin_index", 0)
        for t in self.times:
            for rank, x in enumerate(self.peak_sites(int(t))):
                rows.append(
                    {"t": int(t), "rank": rank, "site": int(x) + origin, "x": int(x)}
                )
        return pandas.DataFrame(rows, columns=["t", "rank", "site", "x"])

    def to_netcdf(self, path) -> None:
        dataset = self._dataset.copy()
        dataset.attrs.update(
            {f"walk_{k}": v for k, v in self._params.to_dict().items()}
        )
        dataset.to_netcdf(path)

    def __repr__(self):
        return (
            f"RunRecord(kind={self._params.kind.value}, g={self._params.g}, "
            f"steps={int(self.times[-1]) if len(self.times) else 0})"
        )


def ballistic_speed(record: RunRecord, t: int) -> float:
    """sigma(t)/t at a recorded step ``t`` > 0."""
    if t == 0:
        raise ValueError("Ballistic speed is undefined at t=0.")
    matches = numpy.flatnonzero(record.times == t)
    if matches.size == 0:
        raise ValueError(f"Step {t} is not in the record.")
    return float(record.sigma[matches[0]] / t)


def peak_velocity(record: RunRecord, last: int = 100) -> float:
    """Least-squares slope of the highest peak's position over the last ``last`` recorded steps."""
    if "peak_x" not in record.dataset:
        raise ValueError("Record has no peak tracks.")
    track = record.dataset["peak_x"].isel(peak=0).values[-last:]
    times = record.times[-last:]
    valid = ~numpy.isnan(track)
    if numpy.count_nonzero(valid) < 2:
        raise ValueError("Not enough peak positions to fit a velocity.")
    slope, _ = numpy.polyfit(times[valid].astype(float), track[valid], 1)
    return float(slope)


class RunRecorder:
    """Observer that accumulates a :class:`RunRecord` while a walk evolves.

    Call it with every state, starting with the initial one.
    """

    def __init__(
        self,
        config: LatticeConfig,
        params: WalkParams,
        snapshot_stride: Optional[int] = None,
        localization_radius: Optional[int] = None,
        track_peaks: bool = False,
        peak_min_separation: int = 4,
        peak_threshold: float = 0.1,
    ) -> None:
        if snapshot_stride is not None and snapshot_stride < 1:
            raise ValueError("Snapshot stride must be a positive integer.")
        self._config = config
        self._params = params
        self._stride = snapshot_stride
        self._radius = localization_radius
        self._track_peaks = track_peaks
        self._min_separation = peak_min_separation
        self._threshold = peak_threshold
        self._positions = config.positions.astype(float)
        self._rows = []
        self._peaks = []
        self._snapshots = {}
        self._last_density = None

    def __call__(self, state: WalkerState) -> None:
        density = charge_density(state)
        charge = float(numpy.sum(density))
        mean, sigma = position_moments(density, self._positions)
        row = {
            "time": state.t,
            "mean_x": float(mean),
            "sigma": float(sigma),
            "speed": float(sigma) / state.t if state.t > 0 else math.nan,
            "charge": charge,
        }
        if self._radius is not None:
            row["localization"] = localization_fraction(state, self._radius)
        if self._track_peaks:
            peaks = ranked_peaks(density, self._min_separation, self._threshold)
            row["n_peaks"] = len(peaks)
            self._peaks.append(
                [float(self._positions[i]) for i in peaks]
            )
        self._rows.append(row)
        if self._stride is not None and state.t % self._stride == 0:
            self._snapshots[state.t] = density
        self._last_density = (state.t, density)

    def record(self, metadata: Dict = None) -> RunRecord:
        """Assemble the record; the final state is always kept as a snapshot."""
        if not self._rows:
            raise ValueError("No states were recorded.")
        frame = pandas.DataFrame(self._rows).set_index("time")
        dataset = xarray.Dataset.from_dataframe(frame)
        dataset = dataset.assign_coords(x=self._positions.astype(int))
        if self._track_peaks:
            width = max([len(p) for p in self._peaks] + [1])
            tracks = numpy.full((len(self._peaks), width), numpy.nan)
            for i, peaks in enumerate(self._peaks):
                tracks[i, : len(peaks)] = peaks
            dataset["peak_x"] = (("time", "peak"), tracks)
        snapshots = dict(self._snapshots)
        if self._last_density is not None:
            t, density = self._last_density
            snapshots.setdefault(t, density)
        times = sorted(snapshots)
        dataset["density"] = (
            ("snapshot_time", "x"),
            numpy.stack([snapshots[t] for t in times]),
        )
        dataset = dataset.assign_coords(snapshot_time=times)
        metadata = dict(metadata or {})
        metadata.setdefault("origin_index", self._config.origin_index)
        return RunRecord(self._params, dataset, metadata)
