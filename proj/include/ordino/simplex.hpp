#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ordino/pmf.hpp"

namespace ordino {

/// Thrown when the alternating-projection solver exhausts its iteration
/// budget; carries the best iterate and its last cycle displacement.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, Eigen::VectorXd iterate, double resid)
      : std::runtime_error(what),
        best_iterate(std::move(iterate)),
        residual(resid) {}
  Eigen::VectorXd best_iterate;
  double residual = 0.0;
};

template <class Scalar>
struct UnimodalProjectionT {
  PmfT<Scalar> nearest;
  Scalar distance = 0;
  int mode = 0;  // 1-based index of the minimizing peak
};

using UnimodalProjection = UnimodalProjectionT<double>;

inline constexpr double kDefaultChainTol = 1e-9;
inline constexpr double kDykstraTol = 1e-10;
inline constexpr int kDykstraMaxIter = 10000;

// Distances within this window of each other count as a tie; ties go to the
// smaller peak index so reports are deterministic.
inline constexpr double kModeTieTol = 1e-12;

namespace detail {

template <class Derived>
void require_min_classes(const Eigen::MatrixBase<Derived>& p, const char* who) {
  if (p.size() < 3)
    throw std::invalid_argument(std::string(who) + ": need at least 3 classes");
}

}  // namespace detail

/// Indices (1-based) whose probability is within `tol` of the maximum.
template <class Derived>
std::vector<int> mode_set(const Eigen::MatrixBase<Derived>& p,
                          typename Derived::Scalar tol = kDefaultChainTol) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = p.derived().maxCoeff();
  std::vector<int> modes;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p.derived()[i] >= top - tol) modes.push_back(static_cast<int>(i) + 1);
  return modes;
}

/// True iff the entries rise to every tol-mode and fall after it, each
/// comparison slackened by `tol`.
template <class Derived>
bool is_unimodal(const Eigen::MatrixBase<Derived>& p,
                 typename Derived::Scalar tol = kDefaultChainTol) {
  using Scalar = typename Derived::Scalar;
  detail::require_min_classes(p, "is_unimodal");
  if (tol < Scalar(0)) throw std::invalid_argument("is_unimodal: tol < 0");
  const auto& v = p.derived();
  const Eigen::Index k = v.size();
  const Scalar top = v.maxCoeff();
  for (Eigen::Index m = 0; m < k; ++m) {
    if (v[m] < top - tol) continue;
    for (Eigen::Index i = 0; i < m; ++i)
      if (v[i] > v[i + 1] + tol) return false;
    for (Eigen::Index i = m; i + 1 < k; ++i)
      if (v[i + 1] > v[i] + tol) return false;
  }
  return true;
}

/// Euclidean projection onto the probability simplex via sort-and-threshold.
template <class Derived>
VectorX<typename Derived::Scalar> project_to_simplex(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (!v.allFinite())
    throw std::invalid_argument("project_to_simplex: non-finite input");
  VectorX<Scalar> sorted = v;
  std::sort(sorted.data(), sorted.data() + sorted.size(),
            std::greater<Scalar>());
  Scalar running = 0;
  Scalar threshold = 0;
  for (Eigen::Index j = 0; j < sorted.size(); ++j) {
    running += sorted[j];
    const Scalar candidate = (running - Scalar(1)) / Scalar(j + 1);
    if (sorted[j] - candidate > Scalar(0)) threshold = candidate;
  }
  return (v.derived().array() - threshold).max(Scalar(0)).matrix();
}

/// Pool-adjacent-violators fit of a nondecreasing sequence, in place.
template <class Scalar>
void isotonic_nondecreasing_inplace(Eigen::Ref<VectorX<Scalar>> x) {
  const Eigen::Index n = x.size();
  if (n <= 1) return;
  std::vector<Scalar> mean(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> count(static_cast<std::size_t>(n));
  std::size_t top = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    mean[top] = x[i];
    count[top] = 1;
    ++top;
    while (top > 1 && mean[top - 2] > mean[top - 1]) {
      const Eigen::Index merged = count[top - 2] + count[top - 1];
      mean[top - 2] = (mean[top - 2] * Scalar(count[top - 2]) +
                       mean[top - 1] * Scalar(count[top - 1])) /
                      Scalar(merged);
      count[top - 2] = merged;
      --top;
    }
  }
  Eigen::Index pos = 0;
  for (std::size_t b = 0; b < top; ++b)
    for (Eigen::Index r = 0; r < count[b]; ++r) x[pos++] = mean[b];
}

/// Projection onto {x : x_1 <= ... <= x_mode}; coordinates past the peak are free.
template <class Derived>
VectorX<typename Derived::Scalar> project_nondecreasing_prefix(
    const Eigen::MatrixBase<Derived>& v, int mode) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> out = v;
  isotonic_nondecreasing_inplace<Scalar>(out.head(mode));
  return out;
}

/// Projection onto {x : x_mode >= ... >= x_K}; coordinates before the peak are free.
template <class Derived>
VectorX<typename Derived::Scalar> project_nonincreasing_suffix(
    const Eigen::MatrixBase<Derived>& v, int mode) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> out = v;
  auto tail = out.tail(out.size() - mode + 1);
  VectorX<Scalar> negated = -tail;  // negation swaps the fit direction
  isotonic_nondecreasing_inplace<Scalar>(negated);
  tail = -negated;
  return out;
}

/// Euclidean projection onto the unimodal slice with its peak pinned at
/// `mode` (1-based): Dykstra alternation over the nondecreasing-prefix cone,
/// the nonincreasing-suffix cone, and the simplex. Stops once a full cycle
/// moves the iterate by less than `tol`.
template <class Derived>
PmfT<typename Derived::Scalar> project_unimodal_fixed_mode(
    const Eigen::MatrixBase<Derived>& v, int mode,
    typename Derived::Scalar tol = kDykstraTol,
    int max_iter = kDykstraMaxIter) {
  using Scalar = typename Derived::Scalar;
  detail::require_min_classes(v, "project_unimodal_fixed_mode");
  const Eigen::Index k = v.size();
  if (mode < 1 || mode > static_cast<int>(k))
    throw std::invalid_argument("project_unimodal_fixed_mode: mode out of range");
  if (!v.allFinite())
    throw std::invalid_argument("project_unimodal_fixed_mode: non-finite input");

  VectorX<Scalar> x = v;
  VectorX<Scalar> inc_prefix = VectorX<Scalar>::Zero(k);
  VectorX<Scalar> inc_suffix = VectorX<Scalar>::Zero(k);
  VectorX<Scalar> inc_simplex = VectorX<Scalar>::Zero(k);
  VectorX<Scalar> t(k), start(k);
  Scalar resid = 0;
  for (int it = 0; it < max_iter; ++it) {
    start = x;
    t = x + inc_prefix;
    x = project_nondecreasing_prefix(t, mode);
    inc_prefix = t - x;
    t = x + inc_suffix;
    x = project_nonincreasing_suffix(t, mode);
    inc_suffix = t - x;
    t = x + inc_simplex;
    x = project_to_simplex(t);
    inc_simplex = t - x;
    resid = (x - start).norm();
    if (resid < tol) return PmfT<Scalar>(x);
  }
  throw ConvergenceError(
      "project_unimodal_fixed_mode: no convergence after " +
          std::to_string(max_iter) + " cycles (residual " +
          std::to_string(static_cast<double>(resid)) + ")",
      x.template cast<double>(), static_cast<double>(resid));
}

/// Euclidean distance from `p` to the nearest unimodal pmf, together with the
/// minimizer and its peak. Exact members short-circuit to distance zero;
/// otherwise each candidate peak is solved by Dykstra, cheap cone distances
/// pruning peaks that cannot win.
template <class Scalar>
UnimodalProjectionT<Scalar> hausdorff_to_unimodal(
    const PmfT<Scalar>& pmf, Scalar tol = kDykstraTol,
    int max_iter = kDykstraMaxIter) {
  const VectorX<Scalar>& p = pmf.values();
  const Eigen::Index k = p.size();
  if (is_unimodal(p, Scalar(kModeTieTol)))
    return {pmf, Scalar(0), mode_set(p, Scalar(kModeTieTol)).front()};

  struct Candidate {
    Scalar bound;
    int mode;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(k));
  for (int m = 1; m <= static_cast<int>(k); ++m) {
    const Scalar d_prefix = (p - project_nondecreasing_prefix(p, m)).norm();
    const Scalar d_suffix = (p - project_nonincreasing_suffix(p, m)).norm();
    candidates.push_back({std::max(d_prefix, d_suffix), m});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              return a.bound != b.bound ? a.bound < b.bound : a.mode < b.mode;
            });

  bool have_best = false;
  VectorX<Scalar> best_nearest;
  Scalar best_distance = 0;
  int best_mode = 0;
  for (const Candidate& c : candidates) {
    if (have_best && c.bound > best_distance + Scalar(kModeTieTol)) break;
    PmfT<Scalar> q = project_unimodal_fixed_mode(p, c.mode, tol, max_iter);
    const Scalar d = (p - q.values()).norm();
    const bool wins =
        !have_best || d < best_distance - Scalar(kModeTieTol) ||
        (d < best_distance + Scalar(kModeTieTol) && c.mode < best_mode);
    if (wins) {
      have_best = true;
      best_nearest = q.values();
      best_distance = d;
      best_mode = c.mode;
    }
  }
  return {PmfT<Scalar>::unchecked(std::move(best_nearest)), best_distance,
          best_mode};
}

/// True iff the distance to the nearest unimodal pmf is at most `eps`.
template <class Scalar>
bool is_approx_unimodal(const PmfT<Scalar>& pmf, Scalar eps) {
  if (eps < Scalar(0)) throw std::invalid_argument("is_approx_unimodal: eps < 0");
  return hausdorff_to_unimodal(pmf).distance <= eps;
}

}  // namespace ordino
