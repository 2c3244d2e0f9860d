# Blow-up rates on the rank-one manifold
# ======================================
#
# Generic rank-one data (away from the single-mode circle and the scattering
# set) develops a turbulent cascade: 1 - |p|^2 decays like kappa/(M t), and
# the Sobolev norms grow like ||u||_{H^s}^2 ~ a^2(s) t^{2s-1}. This script
# integrates the reduced three-variable system far in time and compares the
# measured rates with the closed-form constants.

import numpy as np

import szegolab as sz
from szegolab.experiments import _generic_reduced_start, reduced_sobolev_sq

NU, ALPHA, BETA, M = 1.0, 0.0, 0.0, 1.0

print("== the kappa law: t * gamma(t) -> kappa ==")
for (nu, alpha, beta, mom) in [(1, 0, 0, 1), (1, 0, 1, 1), (2, 1, 0, 1)]:
    t, tg = sz.kappa_check(nu, alpha, beta, mom, eta0=0.3, t_end=1e4)
    kappa = sz.constants(nu, alpha, beta, mom).kappa
    print(f"  (nu,alpha,beta,M)=({nu},{alpha},{beta},{mom}): "
          f"t*gamma(1e4) = {tg[-1]:.4f}, closed form kappa = {kappa}")

print()
print("== Sobolev growth exponents and amplitudes ==")
p = sz.Params(nu=NU, alpha=ALPHA, beta=BETA, rel_tol=1e-11, abs_tol=1e-13)
traj = sz.evolve_reduced(_generic_reduced_start(M, 0.3), p, 1e4, sample_dt=2.0)
cst = sz.constants(NU, ALPHA, BETA, M, s_list=(1.0, 1.5, 2.0))
for s in (1.0, 1.5, 2.0):
    hs = reduced_sobolev_sq(traj.second, traj.eta, M, s)
    fit = sz.fit_power_law(traj.times, hs, window=(1e3, 1e4))
    print(f"  s={s}: fitted t^{fit.exponent:.3f} (theory t^{2*s-1}), "
          f"amplitude {fit.amplitude:.3f} (theory a^2(s) = {cst.a_sq[s]:.3f}), "
          f"R^2 = {fit.r_squared:.6f}")

print()
print("== classification of generic rank-one data ==")
for state in [sz.RankOneState(0, 1, 0.5), sz.RankOneState(0, 1.0, 0.0)]:
    res = sz.classify(state, p, horizon=2000.0)
    extra = f", kappa_hat = {res.kappa_hat:.4f}" if res.kappa_hat else ""
    print(f"  b={state.b}, c={state.c}, p={state.p}: {res.verdict}{extra}")
