#pragma once

// Dense tensor jets in four dimensions.
//
// A Jet holds the covariant components T_{a1..aq} of a rank-q tensor at one
// point together with all partial derivatives d_{m1..mj} T up to a fixed
// order k.  Every level j is stored densely as 4^q x 4^j numbers; derivative
// slots are totally symmetric, so the dense layout simply repeats values.
//
// All algebra below is jet-aware: products and contractions apply the Leibniz
// rule across levels and covariant differentiation consumes one level.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spin2 {

inline constexpr int kDim = 4;
inline constexpr int kMaxJetOrder = 3;

using Point = std::array<double, kDim>;

class JetDepthError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

constexpr int pow4(int n) {
  int r = 1;
  while (n-- > 0) r *= kDim;
  return r;
}

/// Multi-index with at most `Capacity` entries, each in [0, 4).
/// Encoded little-endian-last: (i0, ..., i{n-1}) -> i0*4^{n-1} + ... + i{n-1}.
struct MultiIndex {
  static constexpr int Capacity = 8;
  std::array<int, Capacity> idx{};
  int size = 0;

  static MultiIndex decode(int code, int n) {
    MultiIndex m;
    m.size = n;
    for (int i = n - 1; i >= 0; --i) {
      m.idx[static_cast<std::size_t>(i)] = code % kDim;
      code /= kDim;
    }
    return m;
  }

  [[nodiscard]] int encode() const {
    int code = 0;
    for (int i = 0; i < size; ++i) code = code * kDim + idx[static_cast<std::size_t>(i)];
    return code;
  }

  int& operator[](int i) { return idx[static_cast<std::size_t>(i)]; }
  int operator[](int i) const { return idx[static_cast<std::size_t>(i)]; }

  void push_back(int v) {
    assert(size < Capacity);
    idx[static_cast<std::size_t>(size++)] = v;
  }
};

inline int encode(std::initializer_list<int> ix) {
  int code = 0;
  for (int i : ix) code = code * kDim + i;
  return code;
}

/// Splits the derivative multi-index `d` by bitmask: bits set go to `sel`,
/// the rest to `rest`, both keeping their original order.
inline void split_by_mask(const MultiIndex& d, unsigned mask, MultiIndex& sel, MultiIndex& rest) {
  sel.size = 0;
  rest.size = 0;
  for (int i = 0; i < d.size; ++i) {
    if ((mask >> i) & 1U) {
      sel.push_back(d[i]);
    } else {
      rest.push_back(d[i]);
    }
  }
}

class Jet {
 public:
  Jet() = default;

  Jet(int rank, int order, const Point& point = {}) : rank_(rank), order_(order), point_(point) {
    if (rank < 0 || rank > 6) throw std::invalid_argument("Jet: rank out of range");
    if (order < 0 || order > kMaxJetOrder) throw JetDepthError("Jet: order must be in [0, 3]");
    offsets_[0] = 0;
    for (int j = 0; j <= order_; ++j) {
      offsets_[static_cast<std::size_t>(j + 1)] =
          offsets_[static_cast<std::size_t>(j)] + static_cast<std::size_t>(pow4(rank_) * pow4(j));
    }
    data_.assign(offsets_[static_cast<std::size_t>(order_ + 1)], 0.0);
  }

  [[nodiscard]] int rank() const { return rank_; }
  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] const Point& point() const { return point_; }
  [[nodiscard]] int components() const { return pow4(rank_); }

  double& operator()(int level, int comp, int deriv) { return data_[index(level, comp, deriv)]; }
  double operator()(int level, int comp, int deriv) const { return data_[index(level, comp, deriv)]; }

  [[nodiscard]] double value(int comp) const { return (*this)(0, comp, 0); }
  double& value(int comp) { return (*this)(0, comp, 0); }

  [[nodiscard]] std::span<const double> level(int j) const {
    check_level(j);
    return {data_.data() + offsets_[static_cast<std::size_t>(j)],
            offsets_[static_cast<std::size_t>(j + 1)] - offsets_[static_cast<std::size_t>(j)]};
  }

  [[nodiscard]] std::span<const double> data() const { return data_; }

  /// Same tensor with the jet cut down to `order` levels.
  [[nodiscard]] Jet truncated(int order) const {
    if (order > order_) throw JetDepthError("Jet::truncated: cannot extend jet order");
    Jet out(rank_, order, point_);
    std::copy(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(out.data_.size()),
              out.data_.begin());
    return out;
  }

  /// Largest absolute entry over all levels up to `max_level` (default: all).
  [[nodiscard]] double max_abs(int max_level = -1) const {
    const int top = max_level < 0 ? order_ : std::min(max_level, order_);
    double m = 0.0;
    for (std::size_t i = 0; i < offsets_[static_cast<std::size_t>(top + 1)]; ++i) {
      m = std::max(m, std::abs(data_[i]));
    }
    return m;
  }

  Jet& operator+=(const Jet& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }

 private:
  [[nodiscard]] std::size_t index(int level, int comp, int deriv) const {
    assert(level >= 0 && level <= order_);
    assert(comp >= 0 && comp < pow4(rank_));
    assert(deriv >= 0 && deriv < pow4(level));
    return offsets_[static_cast<std::size_t>(level)] +
           static_cast<std::size_t>(comp) * static_cast<std::size_t>(pow4(level)) +
           static_cast<std::size_t>(deriv);
  }

  void check_level(int j) const {
    if (j < 0 || j > order_) throw JetDepthError("Jet: level " + std::to_string(j) + " not stored");
  }

  void require_same_shape(const Jet& o) const {
    if (o.rank_ != rank_ || o.order_ != order_) {
      throw std::invalid_argument("Jet: shape mismatch in arithmetic");
    }
  }

  int rank_ = 0;
  int order_ = 0;
  Point point_{};
  std::array<std::size_t, kMaxJetOrder + 2> offsets_{};
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Jet algebra
// ---------------------------------------------------------------------------

/// Common order of two jets combined by a product rule.
inline int joint_order(const Jet& a, const Jet& b) { return std::min(a.order(), b.order()); }

/// Tensor product a_{I} b_{J} -> c_{IJ}.
inline Jet outer(const Jet& a, const Jet& b) {
  const int order = joint_order(a, b);
  Jet out(a.rank() + b.rank(), order, a.point());
  const int nb = b.components();
  MultiIndex sel;
  MultiIndex rest;
  for (int j = 0; j <= order; ++j) {
    for (int d = 0; d < pow4(j); ++d) {
      const MultiIndex dm = MultiIndex::decode(d, j);
      for (unsigned mask = 0; mask < (1U << j); ++mask) {
        split_by_mask(dm, mask, sel, rest);
        const int ds = sel.encode();
        const int dr = rest.encode();
        for (int ca = 0; ca < a.components(); ++ca) {
          const double av = a(sel.size, ca, ds);
          if (av == 0.0) continue;
          for (int cb = 0; cb < nb; ++cb) {
            out(j, ca * nb + cb, d) += av * b(rest.size, cb, dr);
          }
        }
      }
    }
  }
  return out;
}

/// Reorders tensor slots: slot s of the input becomes slot perm[s] of the output.
inline Jet permute(const Jet& t, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != t.rank()) throw std::invalid_argument("permute: rank mismatch");
  Jet out(t.rank(), t.order(), t.point());
  for (int c = 0; c < t.components(); ++c) {
    const MultiIndex in = MultiIndex::decode(c, t.rank());
    MultiIndex o;
    o.size = t.rank();
    for (int s = 0; s < t.rank(); ++s) o[perm[static_cast<std::size_t>(s)]] = in[s];
    const int oc = o.encode();
    for (int j = 0; j <= t.order(); ++j) {
      for (int d = 0; d < pow4(j); ++d) out(j, oc, d) = t(j, c, d);
    }
  }
  return out;
}

inline Jet permute(const Jet& t, std::initializer_list<int> perm) {
  return permute(t, std::span<const int>(perm.begin(), perm.size()));
}

/// Swaps two slots of a tensor.
inline Jet swap_slots(const Jet& t, int a, int b) {
  std::array<int, 8> perm{};
  for (int s = 0; s < t.rank(); ++s) perm[static_cast<std::size_t>(s)] = s;
  std::swap(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
  return permute(t, std::span<const int>(perm.data(), static_cast<std::size_t>(t.rank())));
}

/// Metric-weighted trace over slots i < j:
///   out_{rest} = m^{bc} T_{.. b .. c ..}
/// with the Leibniz rule applied between the rank-2 jet `m` and `t`.
inline Jet trace_with(const Jet& m, const Jet& t, int i, int j) {
  if (m.rank() != 2) throw std::invalid_argument("trace_with: weight must be rank 2");
  if (i == j || i < 0 || j < 0 || i >= t.rank() || j >= t.rank()) {
    throw std::invalid_argument("trace_with: bad slot pair");
  }
  if (i > j) std::swap(i, j);
  const int order = joint_order(m, t);
  Jet out(t.rank() - 2, order, t.point());
  MultiIndex sel;
  MultiIndex rest;
  for (int oc = 0; oc < out.components(); ++oc) {
    const MultiIndex om = MultiIndex::decode(oc, out.rank());
    MultiIndex full;
    full.size = t.rank();
    for (int s = 0, k = 0; s < t.rank(); ++s) {
      if (s != i && s != j) full[s] = om[k++];
    }
    for (int lv = 0; lv <= order; ++lv) {
      for (int d = 0; d < pow4(lv); ++d) {
        const MultiIndex dm = MultiIndex::decode(d, lv);
        double acc = 0.0;
        for (unsigned mask = 0; mask < (1U << lv); ++mask) {
          split_by_mask(dm, mask, sel, rest);
          const int ds = sel.encode();
          const int dr = rest.encode();
          for (int b = 0; b < kDim; ++b) {
            for (int c = 0; c < kDim; ++c) {
              const double w = m(sel.size, b * kDim + c, ds);
              if (w == 0.0) continue;
              full[i] = b;
              full[j] = c;
              acc += w * t(rest.size, full.encode(), dr);
            }
          }
        }
        out(lv, oc, d) = acc;
      }
    }
  }
  return out;
}

/// Contracts one slot of `t` with the second slot of the rank-2 jet `m`:
///   out_{.. a ..} = m_{a b} T_{.. b ..}
/// The new index stays in position `slot`.
inline Jet contract_slot(const Jet& m, const Jet& t, int slot) {
  if (m.rank() != 2) throw std::invalid_argument("contract_slot: matrix must be rank 2");
  if (slot < 0 || slot >= t.rank()) throw std::invalid_argument("contract_slot: bad slot");
  const int order = joint_order(m, t);
  Jet out(t.rank(), order, t.point());
  MultiIndex sel;
  MultiIndex rest;
  for (int oc = 0; oc < out.components(); ++oc) {
    MultiIndex full = MultiIndex::decode(oc, t.rank());
    const int a = full[slot];
    for (int lv = 0; lv <= order; ++lv) {
      for (int d = 0; d < pow4(lv); ++d) {
        const MultiIndex dm = MultiIndex::decode(d, lv);
        double acc = 0.0;
        for (unsigned mask = 0; mask < (1U << lv); ++mask) {
          split_by_mask(dm, mask, sel, rest);
          const int ds = sel.encode();
          const int dr = rest.encode();
          for (int b = 0; b < kDim; ++b) {
            const double w = m(sel.size, a * kDim + b, ds);
            if (w == 0.0) continue;
            full[slot] = b;
            acc += w * t(rest.size, full.encode(), dr);
          }
        }
        full[slot] = a;
        out(lv, oc, d) = acc;
      }
    }
  }
  return out;
}

/// Symmetrizes a rank-2 jet: (T_{ab} + T_{ba}) / 2.
inline Jet symmetrize(const Jet& t) {
  if (t.rank() != 2) throw std::invalid_argument("symmetrize: rank-2 only");
  return 0.5 * (t + swap_slots(t, 0, 1));
}

/// Max absolute value over the stored value level (level 0) of a jet.
inline double max_abs_value(const Jet& t) { return t.max_abs(0); }

/// Max absolute difference between the value levels of two same-rank jets.
inline double max_abs_diff(const Jet& a, const Jet& b) {
  if (a.rank() != b.rank()) throw std::invalid_argument("max_abs_diff: rank mismatch");
  double m = 0.0;
  for (int c = 0; c < a.components(); ++c) m = std::max(m, std::abs(a.value(c) - b.value(c)));
  return m;
}

}  // namespace spin2
