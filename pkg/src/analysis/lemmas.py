'''
Monte Carlo checks of the pointwise bounds behind the sinc model's stability:
the Hessian of cos|z| is bounded by 1 in every direction, and g(z) = -sinc(|z|) z is 1-Lipschitz and bounded by 1
'''
import math
import numpy as np
from dataclasses import dataclass

from src.config import cfg
from src.models.models import ModelKind, ModelParams, flux_pointwise, hessian_quadratic_form

VERIFY = cfg['VERIFY']
BOUND_TOL = cfg['NUMERICS']['BOUND_TOL']
_UNIT_SINC = ModelParams(ModelKind.SINC, eta_sq=1.0, beta=1.0, beta1=1.0)


@dataclass(frozen=True)
class LemmaReport:
    '''
    hessian_max_ratio: max of the Hessian quadratic form over |x|^2; lipschitz_max_ratio: max of
    |g(x) - g(y)| / |x - y|; flux_max: max of |g(z)|. holds when all three are <= 1 + BOUND_TOL.
    '''
    n_samples: int
    radius: float
    hessian_max_ratio: float
    lipschitz_max_ratio: float
    flux_max: float
    skipped_pairs: int
    holds: bool


def _in_ball(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    angle = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.stack([r * np.cos(angle), r * np.sin(angle)], axis=-1)


def _g(points):
    gx, gy = flux_pointwise(_UNIT_SINC, points[..., 0], points[..., 1])
    return np.stack([gx, gy], axis=-1)


def lemma_sampler(n_samples=VERIFY['SAMPLES'], radius=VERIFY['RADIUS'], seed=VERIFY['SEED']):
    '''
    Samples (z, x) pairs for the Hessian bound and (x, y) pairs for the Lipschitz bound in the ball of the given
    radius. Half of the Lipschitz pairs are close pairs (|x - y| <= 1), where the ratio approaches the derivative.
    The pairs z = (pi, 0), x = (1, 0) and z = 0, x = (1, 0), where the Hessian bound is attained, are always included.
    Pairs with x = y are skipped.

    :param n_samples: Number of random pairs of each kind, >= 1
    :param radius: Radius of the sampling ball, > 0
    :param seed: Seed of the generator
    :return: LemmaReport
    '''
    if n_samples < 1:
        raise ValueError('n_samples must be >= 1, got {}'.format(n_samples))
    if not radius > 0:
        raise ValueError('radius must be > 0, got {}'.format(radius))
    rng = np.random.default_rng(seed)

    z = np.concatenate([np.array([[math.pi, 0.0], [0.0, 0.0]]), _in_ball(rng, n_samples, radius)])
    x = np.concatenate([np.array([[1.0, 0.0], [1.0, 0.0]]), _in_ball(rng, n_samples, 1.0)])
    x_sq = np.sum(x * x, axis=-1)
    keep = x_sq > 0
    hessian_ratio = float(np.max(hessian_quadratic_form(z[keep], x[keep]) / x_sq[keep]))

    n_far = n_samples - n_samples // 2
    a = _in_ball(rng, n_samples, radius)
    b = np.concatenate([_in_ball(rng, n_far, radius), a[n_far:] + _in_ball(rng, n_samples - n_far, 1.0)])
    dist = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])
    distinct = dist > 0
    skipped = int(np.count_nonzero(~distinct)) + int(np.count_nonzero(~keep))
    diff = _g(a[distinct]) - _g(b[distinct])
    lipschitz = np.hypot(diff[:, 0], diff[:, 1]) / dist[distinct]
    lipschitz_ratio = float(np.max(lipschitz)) if lipschitz.size else 0.0

    gz = _g(z)
    flux_max = float(np.max(np.hypot(gz[:, 0], gz[:, 1])))

    holds = max(hessian_ratio, lipschitz_ratio, flux_max) <= 1.0 + BOUND_TOL
    return LemmaReport(n_samples=n_samples, radius=float(radius), hessian_max_ratio=hessian_ratio,
                       lipschitz_max_ratio=lipschitz_ratio, flux_max=flux_max, skipped_pairs=skipped, holds=holds)
