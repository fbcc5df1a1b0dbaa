#pragma once

// Base-2 Jensen-Shannon divergence between frame distributions, with its
// exact per-frame decomposition.
//
//   JSD(P,Q) = 1/2 KL(P||M) + 1/2 KL(Q||M),  M = (P+Q)/2
//            = sum_f 1/2 [ p_f log2(p_f/m_f) + q_f log2(q_f/m_f) ]
//
// Each summand is non-negative, so it is the contribution of frame f.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "framechange/collect.hpp"
#include "framechange/error.hpp"

namespace framechange {

struct FrameDistribution {
  /// Only strictly positive probabilities are stored.
  std::map<std::string, double> probs;

  double operator[](const std::string &frame) const {
    auto it = probs.find(frame);
    return it == probs.end() ? 0.0 : it->second;
  }

  bool operator==(const FrameDistribution &) const = default;
};

struct FrameContribution {
  double contribution = 0.0;
  /// q - p: positive when the frame's relative frequency rose.
  double delta = 0.0;
};

struct Decomposition {
  double total = 0.0;
  std::map<std::string, FrameContribution> items;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline FrameDistribution normalize(const FrameProfile &profile) {
  if (profile.total <= 0)
    throw EmptyProfile(profile.target.surface(), profile.period_id);
  FrameDistribution d;
  const double total = static_cast<double>(profile.total);
  for (const auto &[frame, count] : profile.counts)
    if (count > 0) d.probs.emplace(frame, static_cast<double>(count) / total);
  return d;
}

/// Per-frame JSD term for probabilities a (period 1) and b (period 2).
/// Symmetric in (a, b) bit-for-bit: only commutative operations combine them.
inline double jsd_term(double a, double b) noexcept {
  if (a == b) return 0.0;
  const double m = (a + b) / 2.0;
  const double ta = a > 0.0 ? a * std::log2(a / m) : 0.0;
  const double tb = b > 0.0 ? b * std::log2(b / m) : 0.0;
  return std::max(0.0, 0.5 * (ta + tb));
}

namespace detail {

/// Walks the union support in frame-name order, calling fn(frame, p_f, q_f).
template <typename Fn>
void for_each_union(const FrameDistribution &p, const FrameDistribution &q,
                    Fn &&fn) {
  auto pi = p.probs.begin();
  auto qi = q.probs.begin();
  while (pi != p.probs.end() || qi != q.probs.end()) {
    if (qi == q.probs.end() || (pi != p.probs.end() && pi->first < qi->first)) {
      fn(pi->first, pi->second, 0.0);
      ++pi;
    } else if (pi == p.probs.end() || qi->first < pi->first) {
      fn(qi->first, 0.0, qi->second);
      ++qi;
    } else {
      fn(pi->first, pi->second, qi->second);
      ++pi;
      ++qi;
    }
  }
}

} // namespace detail

inline double jsd(const FrameDistribution &p, const FrameDistribution &q) {
  CompensatedSum sum;
  detail::for_each_union(p, q, [&](const std::string &, double a, double b) {
    sum.add(jsd_term(a, b));
  });
  return std::clamp(sum.value(), 0.0, 1.0);
}

inline Decomposition decompose(const FrameDistribution &p,
                               const FrameDistribution &q) {
  Decomposition d;
  detail::for_each_union(p, q,
                         [&](const std::string &frame, double a, double b) {
                           d.items.emplace(frame,
                                           FrameContribution{jsd_term(a, b), b - a});
                         });
  d.total = jsd(p, q);
  return d;
}

} // namespace framechange
