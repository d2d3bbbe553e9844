"""Compare the Poisson and Gaussian channels on a shifted Dirac pair.

For priors delta_t and delta_{t+eps}, Poisson TV lies between
(e^{-t}/2)(1 - e^{-eps}) and eps, while Gaussian TV is close to
eps / sqrt(2 pi) for small eps.  The script prints both, then the explicit
bound chain linking the two channels.

    python demos/channel_comparison.py
"""

import math

from chansmooth import ChannelParams, Prior, theorem1_bound, theorem2_bound, tv_gaussian, tv_poisson


def dirac_pair_table(t=1.0):
    params = ChannelParams(a=2.0, sigma=1.0, gamma=1.0)
    print(f"{'eps':>8} {'tv_poisson':>12} {'lower':>12} {'tv_gaussian':>12} {'eps/sqrt(2pi)':>14}")
    for eps in (0.3, 0.1, 0.03, 0.01):
        p1, p2 = Prior.dirac(t, params.a), Prior.dirac(t + eps, params.a)
        tp = tv_poisson(p1, p2, params).value
        tg = tv_gaussian(p1, p2, params).value
        lower = 0.5 * math.exp(-t) * (1.0 - math.exp(-eps))
        print(f"{eps:8.3g} {tp:12.6g} {lower:12.6g} {tg:12.6g} {eps / math.sqrt(2 * math.pi):14.6g}")


def bound_table():
    params = ChannelParams()
    print(f"\n{'log(1/eps)':>10} {'R_eps':>10} {'E_max':>10} {'tv_bound':>12} {'log sqrt(eps)':>14} {'theorem2':>12}")
    for ell in (10.0, 20.0, 40.0, 80.0, 160.0):
        rep = theorem1_bound(None, params, ell=ell)
        print(
            f"{ell:10.0f} {rep.r_epsilon:10.4f} {rep.e_max:10.4f} {rep.tv_bound:12.4g} "
            f"{-ell / 2:14.1f} {theorem2_bound(None, params, ell=ell):12.4g}"
        )


if __name__ == "__main__":
    dirac_pair_table()
    bound_table()
