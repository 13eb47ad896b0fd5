"""Current-status data: slower rate, m-out-of-n calibration.

With a single examination time per subject the quantile estimate converges
at n^(1/3), so the threshold is calibrated by resampling at a data-chosen
size n_b < n.  The grid of resample sizes and the picked n_b are printed.
"""
from welrci import calibrate, fit_npmle, generate, welrci

sample = generate("table5", 100, seed=3)
dist, report = fit_npmle(sample, engine="em")
print(f"EM stopped after {report.iterations} iterations, {dist.m} atoms")

cal = calibrate(sample, 0.5, 0.05, B=200, d=10, seed=2, dist=dist, engine="em")
print("resample sizes:", list(cal.grid))
print("xi per size:   ", [round(x, 3) for x in cal.xi])
print(f"picked n_b = {cal.n_b}, k = {cal.k}, c_n = {cal.c_n:.3g}")

ci = welrci(dist, 0.5, cal.c_n, alpha=0.05, k=cal.k)
print(f"interval [{ci.x_l:.3f}, {ci.x_u:.3f}]  (true median 0.693)")
