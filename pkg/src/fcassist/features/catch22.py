"""The 22 canonical catch22 features, re-implemented from their published definitions.

Every feature z-scores its input first. Values follow the reference
algorithms closely but bit-level parity with the C library is not a goal.
"""

from __future__ import annotations

import numpy as np
from scipy import interpolate, signal

from .autocorr import acf, first_minimum, first_zero_crossing
from .shape import longest_run, zscore

CATCH22_NAMES = (
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "CO_HistogramAMI_even_2_5",
    "CO_trev_1_num",
    "MD_hrv_classic_pnn40",
    "SB_BinaryStats_mean_longstretch1",
    "SB_TransitionMatrix_3ac_sumdiagcov",
    "PD_PeriodicityWang_th0_01",
    "CO_Embed2_Dist_tau_d_expfit_meandiff",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "FC_LocalSimple_mean1_tauresrat",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "SP_Summaries_welch_rect_area_5_1",
    "SB_BinaryStats_diff_longstretch0",
    "SB_MotifThree_quantile_hh",
    "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
    "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
    "SP_Summaries_welch_rect_centroid",
    "FC_LocalSimple_mean3_stderr",
)


def _full_acf(y: np.ndarray) -> np.ndarray:
    return acf(y, y.size - 2)


def histogram_mode(y: np.ndarray, nbins: int) -> float:
    counts, edges = np.histogram(y, bins=nbins)
    centers = (edges[:-1] + edges[1:]) / 2
    return float(centers[counts == counts.max()].mean())


def f1ecac(r: np.ndarray) -> float:
    thresh = 1.0 / np.e
    for i in range(1, r.size):
        if r[i] < thresh:
            return float(i - 1 + (r[i - 1] - thresh) / (r[i - 1] - r[i]))
    return float(r.size)


def histogram_ami(y: np.ndarray, tau: int = 2, nbins: int = 5) -> float:
    lo, hi = y.min(), y.max()
    step = (hi - lo + 0.2) / nbins
    edges = lo - 0.1 + step * np.arange(nbins + 1)
    a, b = y[:-tau], y[tau:]
    joint, _, _ = np.histogram2d(a, b, bins=[edges, edges])
    joint /= a.size
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz])))


def coarse_grain_quantile(y: np.ndarray, groups: int) -> np.ndarray:
    th = np.quantile(y, np.linspace(0, 1, groups + 1))
    th[0] -= 1.0
    labels = np.zeros(y.size, dtype=int)
    for g in range(groups):
        labels[(y > th[g]) & (y <= th[g + 1])] = g
    return labels


def transition_matrix_sumdiagcov(y: np.ndarray, r: np.ndarray) -> float:
    tau = first_zero_crossing(r)
    yd = y[::tau] if tau > 1 else y
    if yd.size < 3:
        return np.nan
    labels = coarse_grain_quantile(yd, 3)
    T = np.zeros((3, 3))
    np.add.at(T, (labels[:-1], labels[1:]), 1.0)
    T /= yd.size - 1
    return float(np.trace(np.cov(T.T)))


def periodicity_wang(y: np.ndarray, th: float = 0.01) -> float:
    n = y.size
    t = np.arange(n, dtype=float)
    knots = np.linspace(0, n - 1, 5)[1:-1]
    try:
        spline = interpolate.LSQUnivariateSpline(t, y, knots, k=3)
        resid = y - spline(t)
    except ValueError:
        resid = y - y.mean()
    acmax = int(np.ceil(n / 3.0))
    if acmax < 3 or resid.size < acmax + 2:
        return 0.0
    r = acf(resid, acmax)[1:]
    troughs, peaks = [], []
    for i in range(1, r.size - 1):
        sin, sout = r[i] - r[i - 1], r[i + 1] - r[i]
        if sin < 0 < sout:
            troughs.append(i)
        elif sin > 0 > sout:
            peaks.append(i)
    for ip in peaks:
        prior = [tr for tr in troughs if tr < ip]
        if not prior:
            continue
        if r[ip] - r[prior[-1]] < th or r[ip] < 0:
            continue
        return float(ip + 1)
    return 0.0


def embed2_dist_expfit(y: np.ndarray, r: np.ndarray) -> float:
    n = y.size
    tau = first_zero_crossing(r)
    tau = min(tau, n // 10) if n >= 10 else 1
    tau = max(tau, 1)
    if n - tau - 1 < 3:
        return np.nan
    dy = np.diff(y)
    d = np.sqrt(dy[: n - tau - 1] ** 2 + dy[tau : n - 1] ** 2)
    mean = d.mean()
    sd = d.std(ddof=1)
    if mean <= 0 or sd <= 0:
        return np.nan
    width = 3.5 * sd / d.size ** (1 / 3)
    nbins = max(1, int(np.ceil(np.ptp(d) / width)))
    counts, edges = np.histogram(d, bins=nbins)
    dens = counts / (d.size * np.diff(edges))
    centers = (edges[:-1] + edges[1:]) / 2
    expfit = np.exp(-centers / mean) / mean
    return float(np.mean(np.abs(dens - expfit)))


def ami_gaussian_fmmi(r: np.ndarray, n: int) -> float:
    tau = min(40, int(np.ceil(n / 2)), r.size - 1)
    rr = np.clip(r[1 : tau + 1], -0.999999, 0.999999)
    ami = -0.5 * np.log(1 - rr**2)
    for i in range(1, ami.size - 1):
        if ami[i] < ami[i - 1] and ami[i] < ami[i + 1]:
            return float(i + 1)
    return float(tau)


def local_simple_tauresrat(y: np.ndarray, r: np.ndarray) -> float:
    res = y[1:] - y[:-1]
    if res.size < 3 or np.ptp(res) == 0:
        return np.nan
    return first_zero_crossing(_full_acf(res)) / first_zero_crossing(r)


def local_simple_mean3_stderr(y: np.ndarray) -> float:
    if y.size < 5:
        return np.nan
    means = (y[:-3] + y[1:-2] + y[2:-1]) / 3.0
    return float(np.std(y[3:] - means, ddof=1))


def outlier_include_mdrmd(y: np.ndarray, sign: int, inc: float = 0.01) -> float:
    n = y.size
    w = sign * y
    top = w.max()
    if top < inc:
        return 0.0
    nthresh = int(top / inc) + 1
    th = np.arange(nthresh) * inc
    tot = np.count_nonzero(w >= 0)
    sw = np.sort(w)
    count = n - np.searchsorted(sw, th, side="left")
    # first/last positions with w >= threshold via monotone running maxima
    prefix = np.maximum.accumulate(w)
    suffix = np.maximum.accumulate(w[::-1])[::-1]
    first = np.searchsorted(prefix, th, side="left")
    last = n - 1 - np.searchsorted(suffix[::-1], th, side="left")
    with np.errstate(invalid="ignore", divide="ignore"):
        ms1 = np.where(count > 1, (last - first) / (count - 1.0), np.nan)
    ms3 = (count - 1) * 100.0 / max(tot, 1)
    over = np.nonzero(ms3 > 2.0)[0]
    mj = int(over[-1]) if over.size else 0
    bad = np.nonzero(np.isnan(ms1))[0]
    fbi = int(bad[0]) if bad.size else nthresh - 1
    limit = min(mj, fbi)
    ms4 = [np.median(np.nonzero(w >= t)[0] + 1) / (n / 2.0) - 1.0 for t in th[: limit + 1]]
    return float(np.median(ms4))


def _welch_rect(y: np.ndarray):
    nfft = 1 << int(np.ceil(np.log2(y.size)))
    f, s = signal.periodogram(y, window="boxcar", nfft=nfft, detrend=False)
    w = 2 * np.pi * f
    sw = s / (2 * np.pi)
    return w, sw


def welch_area_5_1(y: np.ndarray) -> float:
    w, sw = _welch_rect(y)
    dw = w[1] - w[0]
    return float(np.sum(sw[: max(1, sw.size // 5)]) * dw)


def welch_centroid(y: np.ndarray) -> float:
    w, sw = _welch_rect(y)
    cs = np.cumsum(sw)
    if cs[-1] <= 0:
        return 0.0
    return float(w[np.argmax(cs > cs[-1] / 2)])


def motif_three_hh(y: np.ndarray) -> float:
    labels = coarse_grain_quantile(y, 3)
    words = labels[:-1] * 3 + labels[1:]
    p = np.bincount(words, minlength=9) / words.size
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def _line_resid_norm(a: np.ndarray, b: np.ndarray) -> float:
    ac = a - a.mean()
    bc = b - b.mean()
    sxx = ac @ ac
    sxy = ac @ bc
    ss = bc @ bc - (sxy * sxy / sxx if sxx > 0 else 0.0)
    return float(np.sqrt(max(ss, 0.0)))


def fluct_anal_prop_r1(y: np.ndarray, how: str) -> float:
    n = y.size
    if n / 2 <= 5:
        return 0.0
    taus = np.unique(np.round(np.exp(np.linspace(np.log(5), np.log(n / 2), 50))).astype(int))
    if taus.size < 12:
        return 0.0
    prof = np.cumsum(y)
    F = np.empty(taus.size)
    for i, tau in enumerate(taus):
        nb = n // tau
        seg = prof[: nb * tau].reshape(nb, tau)
        t = np.arange(tau, dtype=float)
        tc = t - t.mean()
        slope = (seg - seg.mean(axis=1, keepdims=True)) @ tc / np.dot(tc, tc)
        resid = seg - seg.mean(axis=1, keepdims=True) - slope[:, None] * tc
        if how == "rsrange":
            F[i] = np.mean(resid.max(axis=1) - resid.min(axis=1))
        else:
            F[i] = np.sqrt(np.mean(resid**2))
    if np.any(F <= 0):
        return 0.0
    lt, lf = np.log(taus), np.log(F)
    min_points = 6
    errs = [
        _line_resid_norm(lt[:split], lf[:split]) + _line_resid_norm(lt[split - 1 :], lf[split - 1 :])
        for split in range(min_points, taus.size - min_points + 1)
    ]
    best = int(np.argmin(errs)) + min_points
    return float((best + 1) / taus.size)


def catch22_features(x) -> dict[str, float]:
    x = np.asarray(x, dtype=float)
    y = zscore(x)
    n = y.size
    r = _full_acf(y)
    dy = np.diff(y)
    return {
        "DN_HistogramMode_5": histogram_mode(y, 5),
        "DN_HistogramMode_10": histogram_mode(y, 10),
        "CO_f1ecac": f1ecac(r),
        "CO_FirstMin_ac": float(first_minimum(r)),
        "CO_HistogramAMI_even_2_5": histogram_ami(y),
        "CO_trev_1_num": float(np.mean(dy**3)),
        "MD_hrv_classic_pnn40": float(np.mean(np.abs(dy) * 1000 > 40)),
        "SB_BinaryStats_mean_longstretch1": float(longest_run(y[:-1] > y.mean(), True)),
        "SB_TransitionMatrix_3ac_sumdiagcov": transition_matrix_sumdiagcov(y, r),
        "PD_PeriodicityWang_th0_01": periodicity_wang(y),
        "CO_Embed2_Dist_tau_d_expfit_meandiff": embed2_dist_expfit(y, r),
        "IN_AutoMutualInfoStats_40_gaussian_fmmi": ami_gaussian_fmmi(r, n),
        "FC_LocalSimple_mean1_tauresrat": local_simple_tauresrat(y, r),
        "DN_OutlierInclude_p_001_mdrmd": outlier_include_mdrmd(y, 1),
        "DN_OutlierInclude_n_001_mdrmd": outlier_include_mdrmd(y, -1),
        "SP_Summaries_welch_rect_area_5_1": welch_area_5_1(y),
        "SB_BinaryStats_diff_longstretch0": float(longest_run(dy >= 0, False)),
        "SB_MotifThree_quantile_hh": motif_three_hh(y),
        "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1": fluct_anal_prop_r1(y, "rsrange"),
        "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1": fluct_anal_prop_r1(y, "dfa"),
        "SP_Summaries_welch_rect_centroid": welch_centroid(y),
        "FC_LocalSimple_mean3_stderr": local_simple_mean3_stderr(y),
    }
