"""Residue-series evaluation of MB integrands grouped by convergence cones.

For an N-fold integrand, every choice of N numerator gammas with nonsingular
z-coefficient matrix A defines a pole lattice z(n) = -A^{-1}(b + n), n in N^N.
The residue series over that lattice has terms built from the remaining gamma
factors; coincident hyperplanes raise the pole order, which is handled by
truncated-Taylor (jet) arithmetic on the gamma factors.  Series are grouped by
whether their asymptotic ratio test accepts the requested parameter direction;
the group covering the direction is summed shell-by-shell with compensated
accumulation.

Exactness discipline: pole locations, pole orders, and resonance detection are
computed in rational arithmetic; only the term values themselves are floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .errors import (JetOrderOverflow, NoCover, NoneNonsingular, ResonantLattice,
                     SlowConvergence)
from .gammafn import gammaln_signed, polygamma
from .mellin import MBIntegrand
from .result import EvalResult
from .symcore import LinearForm, Rational, SingularSystemError, mat_inverse, rat

MAX_JET_ORDER = 4  # module default; the CLI config may override


# ---------------------------------------------------------------------------
# jets: dense truncated multivariate Taylor polynomials (tiny shapes)


def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    it = np.ndindex(a.shape)
    for ia in it:
        ca = a[ia]
        if ca == 0.0:
            continue
        sl = tuple(slice(0, s - i) for s, i in zip(a.shape, ia))
        dst = tuple(slice(i, None) for i in ia)
        out[dst] += ca * b[sl]
    return out


def _jet_from_linear(shape, const, grads) -> np.ndarray:
    j = np.zeros(shape)
    j[(0,) * len(shape)] = const
    for axis, g in enumerate(grads):
        if g != 0.0 and shape[axis] > 1:
            idx = [0] * len(shape)
            idx[axis] = 1
            j[tuple(idx)] = g
    return j


def _jet_exp(a: np.ndarray) -> np.ndarray:
    """exp of a jet with zero constant term."""
    out = np.zeros_like(a)
    out[(0,) * a.ndim] = 1.0
    term = out.copy()
    order = sum(s - 1 for s in a.shape)
    for m in range(1, order + 1):
        term = _jet_mul(term, a) / m
        out += term
    return out


def _jet_inv(a: np.ndarray) -> np.ndarray:
    """reciprocal of a jet with nonzero constant term (Newton iteration)."""
    c0 = a[(0,) * a.ndim]
    out = np.zeros_like(a)
    out[(0,) * a.ndim] = 1.0 / c0
    order = sum(s - 1 for s in a.shape)
    steps = max(1, math.ceil(math.log2(order + 1)))
    for _ in range(steps):
        t = -_jet_mul(a, out)
        t[(0,) * a.ndim] += 2.0
        out = _jet_mul(out, t)
    return out


def _jet_pow_int(a: np.ndarray, m: int) -> np.ndarray:
    if m < 0:
        return _jet_pow_int(_jet_inv(a), -m)
    out = np.zeros_like(a)
    out[(0,) * a.ndim] = 1.0
    base = a
    while m:
        if m & 1:
            out = _jet_mul(out, base)
        m >>= 1
        if m:
            base = _jet_mul(base, base)
    return out


def _lgamma_jet(shape, v: float, grads) -> tuple[float, np.ndarray]:
    """(log Gamma(v), normalized jet of Gamma(v + l(eps))/Gamma(v)) for v > 0."""
    order = sum(s - 1 for s in shape)
    l = _jet_from_linear(shape, 0.0, grads)
    acc = np.zeros(shape)
    lp = l
    for r in range(1, order + 1):
        acc += polygamma(r - 1, v) / math.factorial(r) * lp
        if r < order:
            lp = _jet_mul(lp, l)
    return math.lgamma(v), _jet_exp(acc)


_SIN_SERIES = [1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0, 1.0 / 362880.0]


def _gamma_jet(shape, v: Fraction, grads, axis_of_pole: int | None):
    """Jet data for Gamma(v + l(eps)): (axis_laurent_orders, log_scale, sign, jet).

    For v a nonpositive integer the factor must depend on exactly one axis; the
    1/eps Laurent part is returned through axis_laurent_orders.
    """
    vf = float(v)
    orders = [0] * len(shape)
    if v.denominator == 1 and v <= 0:
        axis = axis_of_pole
        g = grads[axis]
        mu = -int(v)
        # Gamma(-mu + g e) = (-1)^mu * pi / (sin(pi g e) * Gamma(1 + mu - g e))
        #                  = (-1)^mu / (g e) * S(pi g e)^-1 / (Gamma(1+mu-g e)/Gamma bits)
        ls, jg = _lgamma_jet(shape, mu + 1.0,
                             [-gg for gg in grads])
        sin_j = np.zeros(shape)
        x2 = np.zeros(shape)
        if shape[axis] > 1:
            idx = [0] * len(shape)
            idx[axis] = 2
            if shape[axis] > 2:
                x2[tuple(idx)] = (math.pi * g) ** 2
        sin_j[(0,) * len(shape)] = _SIN_SERIES[0]
        p = x2.copy()
        for c in _SIN_SERIES[1:]:
            if not p.any():
                break
            sin_j += c * p
            p = _jet_mul(p, x2)
        jet = _jet_mul(_jet_inv(sin_j), _jet_inv(jg))
        orders[axis] = -1
        sign = (-1.0) ** mu * (1.0 if g > 0 else -1.0)
        return orders, -ls - math.log(abs(g)), sign, jet
    if vf > 0:
        ls, jet = _lgamma_jet(shape, vf, grads)
        return orders, ls, 1.0, jet
    # negative non-integer: Gamma(v+l) = pi / (sin(pi(v+l)) Gamma(1-v-l))
    ls, jg = _lgamma_jet(shape, 1.0 - vf, [-gg for gg in grads])
    s0 = math.sin(math.pi * vf)
    c0 = math.cos(math.pi * vf)
    l = _jet_from_linear(shape, 0.0, [math.pi * gg for gg in grads])
    l2 = _jet_mul(l, l)
    # sin(pi v + x) = sin(pi v) cos x + cos(pi v) sin x
    p = l2.copy()
    cosx = np.zeros(shape)
    cosx[(0,) * len(shape)] = 1.0
    fac = 1.0
    order = sum(s - 1 for s in shape)
    for r in range(1, order // 2 + 1):
        fac *= (2 * r - 1) * (2 * r)
        cosx += (-1.0) ** r / fac * p
        p = _jet_mul(p, l2)
    sinx = l.copy()
    p = _jet_mul(l, l2)
    fac = 1.0
    for r in range(1, (order - 1) // 2 + 1):
        fac *= (2 * r) * (2 * r + 1)
        sinx += (-1.0) ** r / fac * p
        p = _jet_mul(p, l2)
    sin_total = s0 * cosx + c0 * sinx
    jet = _jet_mul(_jet_inv(sin_total / s0), _jet_inv(jg))
    return orders, -math.log(abs(s0)) - ls, (1.0 if s0 > 0 else -1.0), jet


# ---------------------------------------------------------------------------
# pole subsets and residue series


@dataclass(frozen=True)
class PoleSubset:
    gamma_ids: tuple[int, ...]
    a_rows: tuple[tuple[Fraction, ...], ...]
    offsets: tuple[LinearForm, ...]     # z-free parts of the selected args
    a_inv: tuple[tuple[Fraction, ...], ...]
    det: Fraction

    @property
    def abs_det(self) -> Fraction:
        return abs(self.det)


def enumerate_pole_subsets(mb: MBIntegrand) -> list[PoleSubset]:
    """All N-subsets of distinct numerator gamma arguments with nonsingular A."""
    n = mb.dim
    nums = [(i, g) for i, g in enumerate(mb.gammas) if g.mult > 0]
    out = []
    for combo in combinations(nums, n):
        rows = []
        offs = []
        for _, g in combo:
            rows.append(tuple(g.arg.coeff(z) for z in mb.zsyms))
            offs.append(LinearForm({k: v for k, v in g.arg.coeffs.items()
                                    if k not in set(mb.zsyms)}, g.arg.const))
        try:
            inv, det = mat_inverse([list(r) for r in rows])
        except SingularSystemError:
            continue
        out.append(PoleSubset(
            gamma_ids=tuple(i for i, _ in combo),
            a_rows=tuple(rows), offsets=tuple(offs),
            a_inv=tuple(tuple(r) for r in inv), det=det))
    if not out:
        raise NoneNonsingular("no nonsingular pole subset")
    out.sort(key=lambda s: s.gamma_ids)
    return out


_IDX = tuple(f"m{i + 1}" for i in range(8))


@dataclass(frozen=True)
class ResidueSeries:
    subset: PoleSubset
    dim: int
    prefactor: Rational                       # includes 1/|det A|
    pref_gammas: tuple                        # passthrough from the integrand
    z_of_n: tuple[LinearForm, ...]            # over m-symbols and parameters
    term_gammas: tuple[tuple[LinearForm, tuple[Fraction, ...], int], ...]
    # (argument over m+params, eps-gradient, multiplicity)
    term_powers: tuple[tuple[str, LinearForm, tuple[Fraction, ...]], ...]
    term_bases: tuple[tuple[Fraction, LinearForm, tuple[Fraction, ...]], ...]
    pole_order_profile: dict = field(default_factory=dict, compare=False)

    def exponent_matrix(self) -> list[tuple[str, list[Fraction]]]:
        """Per parameter, the n-gradient of its exponent (cone generator data)."""
        out = []
        for name, e, _ in self.term_powers:
            out.append((name, [e.coeff(m) for m in _IDX[:self.dim]]))
        return out


def build_residue_series(mb: MBIntegrand, subset: PoleSubset) -> ResidueSeries:
    n = mb.dim
    msyms = _IDX[:n]
    # z_i(m) = -sum_j A^{-1}[i][j] (offset_j + m_j)
    z_of_n = []
    for i in range(n):
        acc = LinearForm.constant(0)
        for j in range(n):
            inv = subset.a_inv[i][j]
            if inv != 0:
                acc = acc - (subset.offsets[j] + LinearForm.symbol(msyms[j])) * inv
        z_of_n.append(acc)
    zmap = dict(zip(mb.zsyms, z_of_n))

    def grad_of(form: LinearForm) -> tuple[Fraction, ...]:
        alpha = [form.coeff(z) for z in mb.zsyms]
        return tuple(sum(alpha[i] * subset.a_inv[i][j] for i in range(n))
                     for j in range(n))

    gammas = []
    for g in mb.gammas:
        gammas.append((g.arg.substitute(zmap), grad_of(g.arg), g.mult))
    powers = []
    for name, e in mb.powers:
        powers.append((name, e.substitute(zmap), grad_of(e)))
    bases = []
    for b, e in mb.base_powers:
        bases.append((b, e.substitute(zmap), grad_of(e)))

    return ResidueSeries(
        subset=subset, dim=n,
        prefactor=mb.prefactor / subset.abs_det,
        pref_gammas=mb.pref_gammas,
        z_of_n=tuple(z_of_n),
        term_gammas=tuple(gammas),
        term_powers=tuple(powers),
        term_bases=tuple(bases),
    )


# ---------------------------------------------------------------------------
# convergence cones via the asymptotic ratio test (exact breakpoint directions)


@dataclass(frozen=True)
class Cone:
    """Ray-wise convergence test data for one residue series."""
    series_id: int
    directions: tuple[tuple[Fraction, ...], ...]
    c1: tuple[Fraction, ...]       # t log t rate per direction (exact)
    c2_const: tuple[float, ...]    # t rate per direction, parameter-free part
    u_grad: tuple[tuple[float, ...], ...]  # per direction, per-parameter multiplier

    def accepts(self, log_params: Sequence[float], slack: float = 1e-9) -> bool:
        for i in range(len(self.directions)):
            if self.c1[i] < 0:
                continue
            if self.c1[i] > 0:
                return False
            rate = self.c2_const[i] + sum(u * lp for u, lp
                                          in zip(self.u_grad[i], log_params))
            if rate >= -slack:
                return False
        return True


def _test_directions(series: ResidueSeries) -> list[tuple[Fraction, ...]]:
    n = series.dim
    if n == 1:
        return [(Fraction(1),)]
    dirs = {tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)}
    if n == 2:
        # breakpoints where a gamma argument's lattice gradient vanishes
        for arg, _, _ in series.term_gammas:
            a = arg.coeff(_IDX[0])
            b = arg.coeff(_IDX[1])
            if a * b < 0:
                d = (abs(b), abs(a))
                s = d[0] + d[1]
                dirs.add((d[0] / s, d[1] / s))
        dirs.add((Fraction(1, 2), Fraction(1, 2)))
    else:
        # sample interior directions; exact breakpoints are a 2-D luxury
        dirs.add(tuple(Fraction(1, n) for _ in range(n)))
        for i in range(n):
            for j in range(i + 1, n):
                d = [Fraction(0)] * n
                d[i] = d[j] = Fraction(1, 2)
                dirs.add(tuple(d))
    return sorted(dirs)


def _cone_for(series_id: int, series: ResidueSeries,
              param_names: Sequence[str]) -> Cone:
    msyms = _IDX[:series.dim]
    dirs = _test_directions(series)
    c1s, c2s, ugrads = [], [], []
    for d in dirs:
        c1 = Fraction(0)
        c2 = 0.0
        for arg, _, mult in series.term_gammas:
            w = sum(arg.coeff(m) * dv for m, dv in zip(msyms, d))
            if w == 0:
                continue
            s = 1 if w > 0 else -1
            c1 += mult * s * abs(w)
            c2 += mult * s * float(abs(w)) * math.log(float(abs(w)))
        for b, e, _ in series.term_bases:
            w = sum(e.coeff(m) * dv for m, dv in zip(msyms, d))
            c2 += float(w) * math.log(float(b))
        ug = []
        for name in param_names:
            w = 0.0
            for pname, e, _ in series.term_powers:
                if pname == name:
                    w += float(sum(e.coeff(m) * dv for m, dv in zip(msyms, d)))
            ug.append(w)
        c1s.append(c1)
        c2s.append(c2)
        ugrads.append(tuple(ug))
    return Cone(series_id=series_id, directions=tuple(dirs), c1=tuple(c1s),
                c2_const=tuple(c2s), u_grad=tuple(ugrads))


@dataclass(frozen=True)
class ResidueSeriesGroup:
    series: tuple[ResidueSeries, ...]
    cones: tuple[Cone, ...]
    param_names: tuple[str, ...]
    log_params: tuple[float, ...]


def group_by_cones(series_list: Sequence[ResidueSeries],
                   param_values: Mapping[str, float] | None = None,
                   param_names: Sequence[str] | None = None) -> ResidueSeriesGroup:
    """Maximal set of series whose convergence test accepts the parameter point.

    Ties between equally valid groups do not arise under the maximal-set rule;
    member order is the deterministic gamma-id order.
    """
    if not series_list:
        raise NoCover("no residue series to group")
    if param_names is None:
        names = sorted({nm for s in series_list for nm, _, _ in s.term_powers})
    else:
        names = list(param_names)
    vals = dict(param_values or {})
    logs = []
    for nm in names:
        v = float(vals[nm])
        if v <= 0:
            raise ValueError(f"parameter {nm} must be positive for the cone test")
        logs.append(math.log(v))
    chosen_s, chosen_c = [], []
    for i, s in enumerate(series_list):
        cone = _cone_for(i, s, names)
        if cone.accepts(logs):
            chosen_s.append(s)
            chosen_c.append(cone)
    if not chosen_s:
        raise NoCover("no residue series converges at this parameter direction")
    return ResidueSeriesGroup(series=tuple(chosen_s), cones=tuple(chosen_c),
                              param_names=tuple(names), log_params=tuple(logs))


# ---------------------------------------------------------------------------
# term evaluation and lattice summation


def _term_value(series: ResidueSeries, m: tuple[int, ...],
                pvals: Mapping[str, Fraction], log_pref: float, sign_pref: float,
                max_jet: int | None = None):
    """Residue at lattice point m; exact pole-order accounting, float value."""
    n = series.dim
    if max_jet is None:
        max_jet = MAX_JET_ORDER
    env: dict[str, object] = {k: v for k, v in pvals.items()}
    env.update({_IDX[i]: m[i] for i in range(n)})

    factors = []
    q = [0] * n
    for arg, grad, mult in series.term_gammas:
        v = arg.evaluate(env)
        v = v if isinstance(v, Fraction) else Fraction(v)
        singular = v.denominator == 1 and v <= 0
        axis = None
        if singular:
            live = [j for j, g in enumerate(grad) if g != 0]
            if len(live) != 1:
                raise ResonantLattice(
                    f"gamma argument {arg!r} singular with multi-axis gradient at {m}")
            axis = live[0]
            q[axis] += mult
        factors.append((v, grad, mult, axis))
    if any(qi <= 0 for qi in q):
        return 0.0, tuple(q)
    if any(qi > max_jet for qi in q):
        raise JetOrderOverflow(f"pole order {q} exceeds max jet order {max_jet} at {m}")

    log_mag = log_pref
    sign = sign_pref
    for name, e, _ in series.term_powers:
        log_mag += float(e.evaluate(env)) * math.log(float(pvals[name]))
    for b, e, _ in series.term_bases:
        log_mag += float(e.evaluate(env)) * math.log(float(b))

    if all(qi == 1 for qi in q):
        # simple poles: plain signed log-gamma product
        for v, grad, mult, axis in factors:
            if axis is None:
                lg, sg = gammaln_signed(float(v))
                log_mag += mult * lg
                if sg < 0 and mult % 2:
                    sign = -sign
            else:
                mu = -int(v)
                g = float(grad[axis])
                log_mag += mult * (-math.lgamma(mu + 1.0) - math.log(abs(g)))
                if (mu % 2 == 1) != (g < 0):
                    if mult % 2:
                        sign = -sign
        return sign * math.exp(log_mag), tuple(q)

    # higher-order point: jet product, residue = coefficient of eps^(q-1)
    shape = tuple(qi for qi in q)
    jet = np.zeros(shape)
    jet[(0,) * n] = 1.0
    for v, grad, mult, axis in factors:
        fgrad = [float(g) for g in grad]
        orders, ls, sg, fj = _gamma_jet(shape, v if isinstance(v, Fraction)
                                        else Fraction(v), fgrad, axis)
        log_mag += mult * ls
        if sg < 0 and mult % 2:
            sign = -sign
        jet = _jet_mul(jet, _jet_pow_int(fj, mult))
    # parameter powers contribute exp(log(p) * grad . eps) jets
    for name, e, grad in series.term_powers:
        lp = math.log(float(pvals[name]))
        l = _jet_from_linear(shape, 0.0, [lp * float(g) for g in grad])
        jet = _jet_mul(jet, _jet_exp(l))
    for b, e, grad in series.term_bases:
        lb = math.log(float(b))
        l = _jet_from_linear(shape, 0.0, [lb * float(g) for g in grad])
        jet = _jet_mul(jet, _jet_exp(l))
    top = jet[tuple(qi - 1 for qi in q)]
    return sign * math.exp(log_mag) * top, tuple(q)


def _shell_points(t: int, n: int):
    if n == 1:
        yield (t,)
        return
    for first in range(t + 1):
        for rest in _shell_points(t - first, n - 1):
            yield (first,) + rest


def eval_series(group: ResidueSeriesGroup, param_values: Mapping[str, object],
                tol: float = 1e-10, max_shells: int = 6000,
                max_jet: int | None = None) -> EvalResult:
    """Sum every series of the group over its lattice, shells by total degree."""
    if max_jet is None:
        max_jet = MAX_JET_ORDER
    pvals: dict[str, Fraction] = {}
    for k, v in param_values.items():
        pvals[k] = v if isinstance(v, Fraction) else Fraction(v) if isinstance(v, int) \
            else Fraction(float(v))

    total = 0.0
    comp = 0.0
    terms = 0
    profiles: dict[tuple, int] = {}
    worst_tail = 0.0
    for series in group.series:
        log_pref = math.log(abs(float(series.prefactor)))
        sign_pref = 1.0 if series.prefactor > 0 else -1.0
        for g in series.pref_gammas:
            x = float(g.arg.evaluate(pvals))
            lg, sg = gammaln_signed(x)
            log_pref += g.mult * lg
            if sg < 0 and g.mult % 2:
                sign_pref = -sign_pref
        n = series.dim
        shell_mags = []
        converged = False
        for t in range(max_shells):
            shell_sum = 0.0
            shell_mag = 0.0
            for m in _shell_points(t, n):
                val, prof = _term_value(series, m, pvals, log_pref, sign_pref, max_jet)
                profiles[prof] = profiles.get(prof, 0) + 1
                terms += 1
                y = val - comp
                tt = total + y
                comp = (tt - total) - y
                total = tt
                shell_sum += val
                shell_mag = max(shell_mag, abs(val))
            shell_mags.append(shell_mag)
            if t >= 3:
                prev = max(shell_mags[-3], 1e-300)
                ratio = max(shell_mags[-1] / prev, shell_mags[-1]
                            / max(shell_mags[-2], 1e-300))
                if t > 15 and ratio >= 0.995:
                    raise SlowConvergence(
                        f"shell ratio {ratio:.4f} too close to 1 at shell {t}")
                if ratio < 1.0:
                    tail = shell_mags[-1] * (t + 2) ** (n - 1) * ratio / (1.0 - ratio)
                    if tail < tol * 0.5 and shell_mags[-1] < tol * 0.5:
                        worst_tail = max(worst_tail, tail)
                        converged = True
                        break
        if not converged:
            raise SlowConvergence("shell budget exhausted before tolerance")
    return EvalResult(value=total, abs_err_est=max(worst_tail, 1e-15),
                      method="series",
                      diagnostics={"terms_summed": terms,
                                   "series_count": len(group.series),
                                   "pole_order_profiles": profiles})


def eval_mb_series(mb: MBIntegrand, param_values: Mapping[str, object],
                   tol: float = 1e-10) -> EvalResult:
    """Subset enumeration + grouping + summation in one call."""
    subsets = enumerate_pole_subsets(mb)
    series = [build_residue_series(mb, s) for s in subsets]
    power_params = {nm for s in series for nm, _, _ in s.term_powers}
    group = group_by_cones(series, {k: float(v) for k, v in param_values.items()
                                    if k in power_params})
    full = dict(param_values)
    return eval_series(group, full, tol)
