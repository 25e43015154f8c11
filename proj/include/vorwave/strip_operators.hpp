#pragma once

#include <vector>

#include "vorwave/periodic_function.hpp"

namespace vorwave {

// Strictly positive conformal strip depth.
struct StripDepth {
    explicit StripDepth(double depth);
    double value;
};

namespace strip {

// Gap between the finite-depth multiplier and its deep-water limit:
//     lambda_n = coth(n d) - 1 = 2 / (e^{2 n d} - 1).
// Evaluated as 2 e^{-2nd} / (1 - e^{-2nd}) so it never overflows and
// underflows gracefully to zero for very large n d.
double multiplier_gap(int n, double d);

// coth(n d) = 1 + lambda_n, always >= 1.
double coth_multiplier(int n, double d);

// Multiplier and convolution-kernel data for one depth at one resolution.
// kappa_values holds the odd kernel
//     kappa(t) = sum_n 2 lambda_n sin(n t)
// sampled at the 2N collocation points, for the quadrature route of the
// deep-water correction operator.
struct KernelTable {
    KernelTable(int n_modes, StripDepth d);
    int n_modes;
    double depth;
    std::vector<double> lambda;        // lambda_1 .. lambda_N
    std::vector<double> kappa_values;  // kernel samples, length 2N
};

// Conjugation operator of the strip: on zero-mean input,
//     a_n cos(nx) + b_n sin(nx)  ->  coth(nd) ( a_n sin(nx) - b_n cos(nx) ).
// Inputs with |mean| above 1e-12 * max(1, max-norm) are rejected.
PeriodicFunction hilbert(const PeriodicFunction& w, StripDepth d);

// Inverse of `hilbert` on zero-mean functions: multiplier tanh(nd) with the
// opposite quarter-turn.
PeriodicFunction hilbert_inverse(const PeriodicFunction& w, StripDepth d);

// Dirichlet-to-Neumann map of the strip: mean -> mean / d and
//     a_n, b_n -> n coth(nd) a_n, n coth(nd) b_n.
PeriodicFunction dirichlet_neumann(const PeriodicFunction& w, StripDepth d);

// Infinite-depth conjugation (all coth factors replaced by 1).
PeriodicFunction hilbert_deep(const PeriodicFunction& w);

// Depth correction  hilbert - hilbert_deep : multipliers lambda_n.  The
// quadrature route evaluates the same operator as a trapezoidal circular
// convolution with kappa_values and exists as an independent cross-check.
PeriodicFunction kernel_correction(const PeriodicFunction& w, const KernelTable& table);
PeriodicFunction kernel_correction_quadrature(const PeriodicFunction& w,
                                              const KernelTable& table);

// Commutator  Q_d(w) = w * C_d(w') - C_d(w w')  with C_d = hilbert at depth d.
// w w' = (w^2/2)' has zero mean analytically; the numerically computed mean
// (roundoff-sized) is subtracted before conjugation.
PeriodicFunction commutator(const PeriodicFunction& w, StripDepth d);

// Same commutator built on the infinite-depth conjugation.
PeriodicFunction commutator_deep(const PeriodicFunction& w);

}  // namespace strip
}  // namespace vorwave
