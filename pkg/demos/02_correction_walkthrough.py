"""
Building the corrected estimator by hand
========================================

Each step of the correction, applied to the second embedded table. Empty
cells receive a small mass ``a`` and observed cells are shrunk accordingly.
"""

from sparsegof import datasets
from sparsegof.correction import (
    admissible_a_interval,
    check_likelihood_condition,
    choose_parameters,
    compute_b_min,
    corrected_estimator,
    corrected_g,
    corrected_q,
    order_stats,
    partition_zeros,
)
from sparsegof.statistics import kullback_g, pearson_q
from sparsegof.tables import independence_null, preprocess

table = preprocess(datasets.load("camargue"))
x = table.flatten()
n, R = int(x.sum()), x.size
null, _ = independence_null(table)

part = partition_zeros(x)
print("cells:", R, " empty:", part.c, " n =", n)

# smallest, second smallest, largest and second largest observed counts
os_ = order_stats(x, part)
print(os_)

b_min = compute_b_min(n, R, os_)
print("b_min =", b_min)

# b sits just above b_min; a must then fall inside this interval
prm = choose_parameters(n, R, part.c, os_)
print("b =", prm.b)
print("a interval:", admissible_a_interval(n, R, part.c, os_, prm.b))
print("a =", prm.a, " d =", prm.d)

est = corrected_estimator(x, part, prm)
print("empty-cell mass:", est.probs[list(part.zero_indices)][0])
print("sum:", est.probs.sum())
print("likelihood condition holds:", check_likelihood_condition(est.probs, part, n))

# direct evaluation and the closed form agree
q = corrected_q(null, x, est)
g = corrected_g(null, x, est)
print(f"Q  {pearson_q(null, x / n, n):.4f} -> Qab {q.value:.4f} (closed form {q.closed_form:.4f})")
print(f"G  {kullback_g(null, x / n, n):.4f} -> Gab {g.value:.4f} (closed form {g.closed_form:.4f})")
