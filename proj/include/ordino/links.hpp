#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ordino/pmf.hpp"

namespace ordino {

enum class RhoKind { Exp, Square, Softplus };
enum class TauKind { Abs, Square };
enum class LinkKind { Sl, Vsl, Cl, Pocl, Povsl, Maul };

inline constexpr double kProbFloor = 1e-12;
inline constexpr double kOrderedInputTol = 1e-9;

/// Declarative description of a likelihood model: the link family, the
/// nonnegative gap map rho, the V-shaping map tau, and the mixture rate of
/// the unimodal/unconstrained blend (used by the Maul link only).
struct LikelihoodSpec {
  LinkKind link = LinkKind::Sl;
  RhoKind rho = RhoKind::Exp;
  TauKind tau = TauKind::Square;
  double mixture_rate = 0.0;
  int num_classes = 0;

  void validate() const {
    if (num_classes < 3)
      throw std::invalid_argument("LikelihoodSpec: num_classes must be >= 3");
    if (!(mixture_rate >= 0.0 && mixture_rate <= 1.0))
      throw std::invalid_argument(
          "LikelihoodSpec: mixture_rate must lie in [0, 1]");
  }

  /// Width of the packed link-input vector (PO models pack the shared score
  /// first, then the learned threshold vector).
  int link_input_dim() const {
    switch (link) {
      case LinkKind::Sl:
      case LinkKind::Vsl:
      case LinkKind::Pocl:
        return num_classes;
      case LinkKind::Cl:
        return num_classes - 1;
      case LinkKind::Povsl:
        return num_classes + 1;
      case LinkKind::Maul:
        return 2 * num_classes;
    }
    return 0;
  }

  /// Output width of the learner network feeding this link.
  int learner_output_dim() const {
    switch (link) {
      case LinkKind::Sl:
      case LinkKind::Vsl:
        return num_classes;
      case LinkKind::Cl:
        return num_classes - 1;
      case LinkKind::Pocl:
      case LinkKind::Povsl:
        return 1;
      case LinkKind::Maul:
        return 2 * num_classes;
    }
    return 0;
  }

  /// Size of the standalone threshold vector for PO models, 0 otherwise.
  int po_bias_dim() const {
    if (link == LinkKind::Pocl) return num_classes - 1;
    if (link == LinkKind::Povsl) return num_classes;
    return 0;
  }
};

template <class Scalar>
Scalar logistic(Scalar u) {
  if (u >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-u));
  const Scalar e = std::exp(u);
  return e / (Scalar(1) + e);
}

// The exponential gap map saturates at e^230 (~8e99) so that cumulative sums
// and their squares stay finite even when a learner diverges mid-training;
// its slope is zero past the cap, consistent with the saturated value.
inline constexpr double kExpGapCap = 230.0;

template <class Scalar>
Scalar rho_apply(RhoKind kind, Scalar u) {
  switch (kind) {
    case RhoKind::Exp:
      return std::exp(std::min(u, Scalar(kExpGapCap)));
    case RhoKind::Square:
      return u * u;
    case RhoKind::Softplus:
      return u > Scalar(0) ? u + std::log1p(std::exp(-u))
                           : std::log1p(std::exp(u));
  }
  return Scalar(0);
}

template <class Scalar>
Scalar rho_deriv(RhoKind kind, Scalar u) {
  switch (kind) {
    case RhoKind::Exp:
      return u > Scalar(kExpGapCap) ? Scalar(0) : std::exp(u);
    case RhoKind::Square:
      return Scalar(2) * u;
    case RhoKind::Softplus:
      return logistic(u);
  }
  return Scalar(0);
}

template <class Scalar>
Scalar tau_apply(TauKind kind, Scalar u) {
  switch (kind) {
    case TauKind::Abs:
      return std::abs(u);
    case TauKind::Square:
      return u * u;
  }
  return Scalar(0);
}

template <class Scalar>
Scalar tau_deriv(TauKind kind, Scalar u) {
  switch (kind) {
    case TauKind::Abs:
      return Scalar((u > Scalar(0)) - (u < Scalar(0)));
    case TauKind::Square:
      return Scalar(2) * u;
  }
  return Scalar(0);
}

template <class Derived>
VectorX<typename Derived::Scalar> tau_map(const Eigen::MatrixBase<Derived>& u,
                                          TauKind kind) {
  using Scalar = typename Derived::Scalar;
  return u.derived().unaryExpr(
      [kind](Scalar x) { return tau_apply(kind, x); });
}

/// Softmax of the negated inputs, shifted by the minimum so the exponents
/// never overflow. Invariant under adding a constant to every input.
template <class Derived>
VectorX<typename Derived::Scalar> sl_link(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  if (!u.allFinite()) throw std::invalid_argument("sl_link: non-finite input");
  const Scalar shift = u.derived().minCoeff();
  VectorX<Scalar> w = (-(u.derived().array() - shift)).exp();
  return w / w.sum();
}

template <class DerivedU, class DerivedG>
VectorX<typename DerivedU::Scalar> sl_link_vjp(
    const Eigen::MatrixBase<DerivedU>& u,
    const Eigen::MatrixBase<DerivedG>& dprob) {
  using Scalar = typename DerivedU::Scalar;
  const VectorX<Scalar> p = sl_link(u);
  const Scalar along = dprob.derived().dot(p);
  return (p.array() * (along - dprob.derived().array())).matrix();
}

/// Cumulative-sum reparameterization: keeps the first entry and adds the
/// nonnegative image of each later entry, producing a nondecreasing vector.
template <class Derived>
VectorX<typename Derived::Scalar> ordered_transform(
    const Eigen::MatrixBase<Derived>& g, RhoKind rho) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> out(g.size());
  out[0] = g.derived()[0];
  for (Eigen::Index i = 1; i < g.size(); ++i)
    out[i] = out[i - 1] + rho_apply(rho, g.derived()[i]);
  return out;
}

template <class DerivedG, class DerivedU>
VectorX<typename DerivedG::Scalar> ordered_transform_vjp(
    const Eigen::MatrixBase<DerivedG>& g, RhoKind rho,
    const Eigen::MatrixBase<DerivedU>& upstream) {
  using Scalar = typename DerivedG::Scalar;
  VectorX<Scalar> out(g.size());
  Scalar tail = 0;
  for (Eigen::Index i = g.size() - 1; i >= 1; --i) {
    tail += upstream.derived()[i];
    out[i] = rho_deriv(rho, g.derived()[i]) * tail;
  }
  out[0] = tail + upstream.derived()[0];
  return out;
}

/// Raises entries to at least `floor` and renormalizes, so downstream
/// logarithms stay finite.
template <class Derived>
VectorX<typename Derived::Scalar> clamp_renormalize(
    const Eigen::MatrixBase<Derived>& p,
    typename Derived::Scalar floor = kProbFloor) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> q = p.derived().array().max(floor).matrix();
  return q / q.sum();
}

template <class DerivedP, class DerivedG>
VectorX<typename DerivedP::Scalar> clamp_renormalize_vjp(
    const Eigen::MatrixBase<DerivedP>& p_raw,
    const Eigen::MatrixBase<DerivedG>& upstream,
    typename DerivedP::Scalar floor = kProbFloor) {
  using Scalar = typename DerivedP::Scalar;
  VectorX<Scalar> q = p_raw.derived().array().max(floor).matrix();
  const Scalar total = q.sum();
  const VectorX<Scalar> p = q / total;
  const Scalar along = upstream.derived().dot(p);
  VectorX<Scalar> out = ((upstream.derived().array() - along) / total).matrix();
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (p_raw.derived()[i] <= floor) out[i] = Scalar(0);
  return out;
}

/// V-shaped stereotype link: order the inputs, V-shape them with tau, then
/// apply the softmax-of-negation. The output is unimodal by construction.
template <class Derived>
VectorX<typename Derived::Scalar> vsl_link(const Eigen::MatrixBase<Derived>& u,
                                           RhoKind rho, TauKind tau) {
  return sl_link(tau_map(ordered_transform(u, rho), tau));
}

template <class DerivedU, class DerivedG>
VectorX<typename DerivedU::Scalar> vsl_link_vjp(
    const Eigen::MatrixBase<DerivedU>& u, RhoKind rho, TauKind tau,
    const Eigen::MatrixBase<DerivedG>& dprob) {
  using Scalar = typename DerivedU::Scalar;
  const VectorX<Scalar> acute = ordered_transform(u, rho);
  const VectorX<Scalar> shaped = tau_map(acute, tau);
  VectorX<Scalar> d_shaped = sl_link_vjp(shaped, dprob);
  VectorX<Scalar> d_acute(acute.size());
  for (Eigen::Index i = 0; i < acute.size(); ++i)
    d_acute[i] = tau_deriv(tau, acute[i]) * d_shaped[i];
  return ordered_transform_vjp(u, rho, d_acute);
}

/// Cumulative-logits link on K-1 nondecreasing thresholds: probabilities are
/// consecutive differences of logistic values, clamped away from zero.
template <class Derived>
VectorX<typename Derived::Scalar> cl_link(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = u.size();
  if (m < 2) throw std::invalid_argument("cl_link: need at least 2 thresholds");
  if (!u.allFinite()) throw std::invalid_argument("cl_link: non-finite input");
  for (Eigen::Index i = 0; i + 1 < m; ++i)
    if (u.derived()[i + 1] < u.derived()[i] - Scalar(kOrderedInputTol))
      throw std::invalid_argument("cl_link: inputs must be nondecreasing");
  VectorX<Scalar> s(m);
  for (Eigen::Index i = 0; i < m; ++i) s[i] = logistic(u.derived()[i]);
  VectorX<Scalar> p(m + 1);
  p[0] = s[0];
  for (Eigen::Index y = 1; y < m; ++y) p[y] = s[y] - s[y - 1];
  p[m] = Scalar(1) - s[m - 1];
  return clamp_renormalize(p);
}

template <class DerivedU, class DerivedG>
VectorX<typename DerivedU::Scalar> cl_link_vjp(
    const Eigen::MatrixBase<DerivedU>& u,
    const Eigen::MatrixBase<DerivedG>& dprob) {
  using Scalar = typename DerivedU::Scalar;
  const Eigen::Index m = u.size();
  VectorX<Scalar> s(m);
  for (Eigen::Index i = 0; i < m; ++i) s[i] = logistic(u.derived()[i]);
  VectorX<Scalar> raw(m + 1);
  raw[0] = s[0];
  for (Eigen::Index y = 1; y < m; ++y) raw[y] = s[y] - s[y - 1];
  raw[m] = Scalar(1) - s[m - 1];
  const VectorX<Scalar> d_raw = clamp_renormalize_vjp(raw, dprob);
  VectorX<Scalar> out(m);
  for (Eigen::Index i = 0; i < m; ++i)
    out[i] = (d_raw[i] - d_raw[i + 1]) * s[i] * (Scalar(1) - s[i]);
  return out;
}

/// Shared-score inputs for PO models: ordered thresholds minus the score.
template <class Derived>
VectorX<typename Derived::Scalar> po_inputs(
    typename Derived::Scalar score, const Eigen::MatrixBase<Derived>& b,
    RhoKind rho) {
  return (ordered_transform(b, rho).array() - score).matrix();
}

/// Convex blend of a unimodal V-shaped link and the unconstrained link; the
/// mixture rate bounds how far the result can sit from the unimodal set.
template <class Derived1, class Derived2>
VectorX<typename Derived1::Scalar> maul_link(
    const Eigen::MatrixBase<Derived1>& u_unimodal,
    const Eigen::MatrixBase<Derived2>& u_free, const LikelihoodSpec& spec) {
  using Scalar = typename Derived1::Scalar;
  const Scalar r = Scalar(spec.mixture_rate);
  if (!(r >= Scalar(0) && r <= Scalar(1)))
    throw std::invalid_argument("maul_link: mixture_rate outside [0, 1]");
  return (Scalar(1) - r) * vsl_link(u_unimodal, spec.rho, spec.tau) +
         r * sl_link(u_free);
}

namespace detail {

inline void check_input_dim(const LikelihoodSpec& spec, Eigen::Index got,
                            const char* who) {
  if (got != spec.link_input_dim())
    throw std::invalid_argument(std::string(who) + ": expected " +
                                std::to_string(spec.link_input_dim()) +
                                " link inputs, got " + std::to_string(got));
}

}  // namespace detail

/// Probability vector of the model described by `spec` at the packed link
/// inputs (see LikelihoodSpec::link_input_dim for the packing).
inline Eigen::VectorXd link_prob(const LikelihoodSpec& spec,
                                 const Eigen::Ref<const Eigen::VectorXd>& in) {
  detail::check_input_dim(spec, in.size(), "link_prob");
  const int k = spec.num_classes;
  switch (spec.link) {
    case LinkKind::Sl:
      return sl_link(in);
    case LinkKind::Vsl:
      return vsl_link(in, spec.rho, spec.tau);
    case LinkKind::Cl:
      return cl_link(ordered_transform(in, spec.rho));
    case LinkKind::Pocl:
      return cl_link(po_inputs(in[0], in.tail(k - 1).eval(), spec.rho));
    case LinkKind::Povsl:
      return sl_link(
          tau_map(po_inputs(in[0], in.tail(k).eval(), spec.rho), spec.tau));
    case LinkKind::Maul:
      return maul_link(in.head(k), in.tail(k), spec);
  }
  throw std::logic_error("link_prob: unknown link");
}

/// Pulls a gradient with respect to the output probabilities back to the
/// packed link inputs.
inline Eigen::VectorXd link_vjp(const LikelihoodSpec& spec,
                                const Eigen::Ref<const Eigen::VectorXd>& in,
                                const Eigen::Ref<const Eigen::VectorXd>& dprob) {
  detail::check_input_dim(spec, in.size(), "link_vjp");
  const int k = spec.num_classes;
  switch (spec.link) {
    case LinkKind::Sl:
      return sl_link_vjp(in, dprob);
    case LinkKind::Vsl:
      return vsl_link_vjp(in, spec.rho, spec.tau, dprob);
    case LinkKind::Cl: {
      const Eigen::VectorXd w = ordered_transform(in, spec.rho);
      return ordered_transform_vjp(in, spec.rho, cl_link_vjp(w, dprob));
    }
    case LinkKind::Pocl: {
      const Eigen::VectorXd b = in.tail(k - 1);
      const Eigen::VectorXd w = po_inputs(in[0], b, spec.rho);
      const Eigen::VectorXd dw = cl_link_vjp(w, dprob);
      Eigen::VectorXd out(in.size());
      out[0] = -dw.sum();
      out.tail(k - 1) = ordered_transform_vjp(b, spec.rho, dw);
      return out;
    }
    case LinkKind::Povsl: {
      const Eigen::VectorXd b = in.tail(k);
      const Eigen::VectorXd w = po_inputs(in[0], b, spec.rho);
      const Eigen::VectorXd shaped = tau_map(w, spec.tau);
      Eigen::VectorXd d_shaped = sl_link_vjp(shaped, dprob);
      Eigen::VectorXd dw(k);
      for (int i = 0; i < k; ++i) dw[i] = tau_deriv(spec.tau, w[i]) * d_shaped[i];
      Eigen::VectorXd out(in.size());
      out[0] = -dw.sum();
      out.tail(k) = ordered_transform_vjp(b, spec.rho, dw);
      return out;
    }
    case LinkKind::Maul: {
      Eigen::VectorXd out(in.size());
      const double r = spec.mixture_rate;
      out.head(k) = vsl_link_vjp(in.head(k).eval(), spec.rho, spec.tau,
                                 ((1.0 - r) * dprob).eval());
      out.tail(k) = sl_link_vjp(in.tail(k).eval(), (r * dprob).eval());
      return out;
    }
  }
  throw std::logic_error("link_vjp: unknown link");
}

/// Gradient of log P(label) with respect to the packed link inputs, through
/// the same floor-and-renormalize guard the training loss applies.
inline Eigen::VectorXd log_prob_grad(const LikelihoodSpec& spec,
                                     const Eigen::Ref<const Eigen::VectorXd>& in,
                                     int label) {
  if (label < 1 || label > spec.num_classes)
    throw std::invalid_argument("log_prob_grad: label out of range");
  const Eigen::VectorXd p_raw = link_prob(spec, in);
  const Eigen::VectorXd p = clamp_renormalize(p_raw);
  Eigen::VectorXd dprob = Eigen::VectorXd::Zero(spec.num_classes);
  dprob[label - 1] = 1.0 / p[label - 1];
  return link_vjp(spec, in, clamp_renormalize_vjp(p_raw, dprob));
}

}  // namespace ordino
