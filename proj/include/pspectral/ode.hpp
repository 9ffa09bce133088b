#pragma once

// Dormand-Prince 5(4) integrator with continuous (4th order) dense output and
// a single terminal event. Header-only, templated on the state dimension.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "pspectral/errors.hpp"

namespace pspectral::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-12;
  double atol = 1e-12;
  double h_initial = 0.0;  // 0 selects 1e-3 of the span
  double h_max = std::numeric_limits<double>::infinity();
  double event_tol = 1e-13;  // absolute, in t
  int max_steps = 200000;
};

template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  State<N> r1{}, r2{}, r3{}, r4{}, r5{};

  State<N> eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i) y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
    return y;
  }
};

/// Piecewise dense output of an integration run, in either time direction.
template <std::size_t N>
class Trajectory {
 public:
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  const std::vector<DenseStep<N>>& steps() const { return steps_; }

  State<N> eval(double t) const {
    if (steps_.empty()) return y_begin_;
    const bool fwd = t_end_ >= t_begin_;
    // first step whose far end is beyond t
    auto it = std::lower_bound(steps_.begin(), steps_.end(), t, [fwd](const DenseStep<N>& s, double x) {
      const double end = s.t0 + s.h;
      return fwd ? end < x : end > x;
    });
    if (it == steps_.end()) --it;
    return it->eval(t);
  }

  /// Step boundaries t_begin, ..., t_end.
  std::vector<double> knots() const {
    std::vector<double> out{t_begin_};
    for (const auto& s : steps_) out.push_back(s.t0 + s.h);
    if (!steps_.empty()) out.back() = t_end_;
    return out;
  }

  void start(double t, const State<N>& y) {
    t_begin_ = t_end_ = t;
    y_begin_ = y;
    steps_.clear();
  }
  void push(const DenseStep<N>& s) {
    steps_.push_back(s);
    t_end_ = s.t0 + s.h;
  }
  void truncate(double t) { t_end_ = t; }

 private:
  double t_begin_ = 0.0;
  double t_end_ = 0.0;
  State<N> y_begin_{};
  std::vector<DenseStep<N>> steps_;
};

template <std::size_t N>
struct Result {
  Trajectory<N> trajectory;
  double t = 0.0;  // where integration stopped
  State<N> y{};
  bool event = false;
  int accepted = 0;
  int rejected = 0;
};

template <std::size_t N>
using Rhs = std::function<State<N>(double, const State<N>&)>;
template <std::size_t N>
using EventFn = std::function<double(double, const State<N>&)>;

namespace detail {

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
  State<N> out = y;
  for (const auto& [c, k] : terms)
    for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
  return out;
}

}  // namespace detail

/// Integrates y' = f(t, y) from t0 towards t_end (either direction). If
/// `event` is given, integration stops at the first sign change of
/// event(t, y) after t0, located on the dense output.
template <std::size_t N>
Result<N> integrate(const Rhs<N>& f, double t0, const State<N>& y0, double t_end, const Options& opt,
                    const EventFn<N>& event = nullptr) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  Result<N> res;
  res.trajectory.start(t0, y0);
  res.t = t0;
  res.y = y0;
  const double span = t_end - t0;
  if (span == 0.0) return res;
  const double dir = span > 0.0 ? 1.0 : -1.0;
  double h = opt.h_initial > 0.0 ? opt.h_initial : 1e-3 * std::abs(span);
  h = std::min(h, opt.h_max);

  double t = t0;
  State<N> y = y0;
  State<N> k1 = f(t, y);
  double g_prev = event ? event(t, y) : 0.0;
  bool last_rejected = false;

  while (dir * (t_end - t) > 0.0) {
    if (res.accepted + res.rejected >= opt.max_steps) throw NumericalError("ode: step limit reached");
    bool final_step = false;
    if (h >= std::abs(t_end - t)) {
      h = std::abs(t_end - t);
      final_step = true;
    }
    const double hs = dir * h;
    using detail::axpy;
    const State<N> k2 = f(t + c2 * hs, axpy<N>(y, hs, {{a21, &k1}}));
    const State<N> k3 = f(t + c3 * hs, axpy<N>(y, hs, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = f(t + c4 * hs, axpy<N>(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 = f(t + c5 * hs, axpy<N>(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<N> k6 =
        f(t + hs, axpy<N>(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<N> y1 = axpy<N>(y, hs, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const State<N> k7 = f(t + hs, y1);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (ei / sc) * (ei / sc);
      finite = finite && std::isfinite(y1[i]);
    }
    err = finite ? std::sqrt(err / N) : std::numeric_limits<double>::infinity();

    if (!(err <= 1.0)) {
      ++res.rejected;
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= fac;
      last_rejected = true;
      if (h <= 1e-15 * std::max(1.0, std::abs(t))) throw NumericalError("ode: step size underflow");
      continue;
    }

    DenseStep<N> ds;
    ds.t0 = t;
    ds.h = hs;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = y1[i] - y[i];
      const double bspl = hs * k1[i] - ydiff;
      ds.r1[i] = y[i];
      ds.r2[i] = ydiff;
      ds.r3[i] = bspl;
      ds.r4[i] = ydiff - hs * k7[i] - bspl;
      ds.r5[i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    res.trajectory.push(ds);
    ++res.accepted;
    const double t_new = final_step ? t_end : t + hs;

    if (event) {
      const double g_new = event(t_new, y1);
      if (g_prev != 0.0 && (g_new == 0.0 || (g_new > 0.0) != (g_prev > 0.0))) {
        // Illinois iteration on the dense output.
        double ta = t, tb = t_new, ga = g_prev, gb = g_new;
        int side = 0;
        double tr = tb;
        for (int it = 0; it < 200 && std::abs(tb - ta) > opt.event_tol; ++it) {
          tr = (ta * gb - tb * ga) / (gb - ga);
          if (!(std::min(ta, tb) < tr && tr < std::max(ta, tb))) tr = 0.5 * (ta + tb);
          const double gr = event(tr, ds.eval(tr));
          if (gr == 0.0) {
            ta = tb = tr;
            break;
          }
          if ((gr > 0.0) == (gb > 0.0)) {
            tb = tr;
            gb = gr;
            if (side == -1) ga *= 0.5;
            side = -1;
          } else {
            ta = tr;
            ga = gr;
            if (side == 1) gb *= 0.5;
            side = 1;
          }
        }
        tr = g_new == 0.0 ? t_new : 0.5 * (ta + tb);
        res.trajectory.truncate(tr);
        res.t = tr;
        res.y = ds.eval(tr);
        res.event = true;
        return res;
      }
      g_prev = g_new;
    }

    t = t_new;
    y = y1;
    k1 = k7;
    double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
    h = std::min(h * fac, opt.h_max);
    last_rejected = false;
  }
  res.t = t;
  res.y = y;
  return res;
}

}  // namespace pspectral::ode
