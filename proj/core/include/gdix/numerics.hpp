#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gdix {

// Finite-difference weights (Fornberg's recursion) for derivatives of
// order 0..max_order at x0 using arbitrary distinct nodes.
// Result is indexed [order][node].
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes,
                                                  int max_order);

// Lagrange interpolation weights for evaluating at x from the given nodes.
std::vector<double> lagrange_weights(double x, std::span<const double> nodes);

// Index of the first of `count` consecutive nodes of a sorted array that
// best surround x (clamped to the array ends).
std::size_t stencil_start(std::span<const double> nodes, double x, std::size_t count);

// Cubic Hermite basis on [0, 1]: returns (h00, h10, h01, h11) at s.
struct HermiteBasis {
  double h00, h10, h01, h11;
};
HermiteBasis hermite_basis(double s);

// Minimizes a unimodal f on [a, b] by golden-section search until the
// bracket is shorter than tol. Returns the abscissa.
double golden_section_minimize(const std::function<double(double)>& f, double a, double b,
                               double tol);

// Finds a root of f in [a, b] (f(a), f(b) of opposite sign) by bisection.
double bisect_root(const std::function<double(double)>& f, double a, double b, double tol);

// Runs body(i) for i in [0, count) on up to `jobs` threads. Exceptions are
// rethrown on the calling thread (the one from the lowest index wins).
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace gdix
