#include "levsense/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "levsense/constants.hpp"
#include "levsense/errors.hpp"

namespace levsense {

namespace {

struct Curve {
  double b;       // amplitude at the reference time
  double lambda;  // 1 / tau
};

double weighted_ssr(std::span<const double> t, std::span<const double> y, const std::vector<double>& w,
                    double tc, Curve c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - c.b * std::exp(-c.lambda * (t[i] - tc));
    acc += w[i] * r * r;
  }
  return acc;
}

}  // namespace

ExpFit fit_exponential(std::span<const double> times, std::span<const double> envelope,
                       std::optional<std::span<const double>> weights, const ExpFitOptions& options) {
  const std::size_t n = times.size();
  if (n != envelope.size()) throw DomainError("fit_exponential: times and envelope differ in length");
  if (n < 3) throw DomainError("fit_exponential: need at least 3 points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("fit_exponential: times must be strictly increasing");
  }
  std::vector<double> w(n, 1.0);
  if (weights) {
    if (weights->size() != n) throw DomainError("fit_exponential: weights differ in length");
    for (std::size_t i = 0; i < n; ++i) {
      if (!((*weights)[i] >= 0)) throw DomainError("fit_exponential: weights must be non-negative");
      w[i] = (*weights)[i];
    }
  }
  const double tc = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(n);
  const double span = times.back() - times.front();

  // Initial guess from log(y) = log(B) - lambda (t - tc), weighted by y^2.
  Curve c{0.0, 0.0};
  {
    double sw = 0, st = 0, sl = 0, stt = 0, stl = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(envelope[i] > 0)) continue;
      const double wi = w[i] * envelope[i] * envelope[i];
      const double ti = times[i] - tc;
      const double li = std::log(envelope[i]);
      sw += wi, st += wi * ti, sl += wi * li, stt += wi * ti * ti, stl += wi * ti * li;
      ++used;
    }
    const double det = sw * stt - st * st;
    if (used >= 2 && det > 0) {
      const double slope = (sw * stl - st * sl) / det;
      c = {std::exp((sl - slope * st) / sw), -slope};
    } else {
      double sy = 0, sww = 0;
      for (std::size_t i = 0; i < n; ++i) sy += w[i] * envelope[i], sww += w[i];
      c = {sww > 0 ? sy / sww : 0.0, 0.0};
    }
  }

  auto normal_equations = [&](Curve cur, Eigen::Matrix2d& jtj, Eigen::Vector2d& jtr) {
    jtj.setZero();
    jtr.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const double ti = times[i] - tc;
      const double e = std::exp(-cur.lambda * ti);
      const Eigen::Vector2d j(e, -cur.b * ti * e);
      const double r = envelope[i] - cur.b * e;
      jtj += w[i] * j * j.transpose();
      jtr += w[i] * r * j;
    }
  };

  double ssr = weighted_ssr(times, envelope, w, tc, c);
  double mu = 1e-3;
  int iter = 0;
  Eigen::Matrix2d jtj;
  Eigen::Vector2d jtr;
  for (; iter < options.max_iterations; ++iter) {
    normal_equations(c, jtj, jtr);
    const Eigen::Vector2d scale = jtj.diagonal().cwiseSqrt();
    if (scale.minCoeff() <= 0) break;
    const double grad = (jtr.cwiseQuotient(scale)).cwiseAbs().maxCoeff();
    if (grad <= options.gradient_tolerance * std::max(std::sqrt(ssr), std::numeric_limits<double>::min()) ||
        grad == 0.0) {
      break;
    }
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::Matrix2d damped = jtj;
      damped.diagonal() *= (1.0 + mu);
      const Eigen::Vector2d delta = damped.ldlt().solve(jtr);
      const Curve trial{c.b + delta(0), c.lambda + delta(1)};
      const double trial_ssr = weighted_ssr(times, envelope, w, tc, trial);
      if (std::isfinite(trial_ssr) && trial_ssr <= ssr) {
        const bool tiny = std::abs(delta(0)) <= 1e-15 * std::abs(c.b) &&
                          std::abs(delta(1)) * std::max(span, 1e-300) <= 1e-15;
        c = trial;
        ssr = trial_ssr;
        mu = std::max(mu * 0.1, 1e-12);
        accepted = !tiny;
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) break;
  }

  ExpFit fit;
  fit.iterations = iter;
  fit.amplitude = c.b * std::exp(c.lambda * tc);
  fit.decay_time = c.lambda == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / c.lambda;
  fit.decaying = c.lambda > 0 && c.lambda * span > 1e-12;
  double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  fit.residual_rms = wsum > 0 ? std::sqrt(ssr / wsum) : 0.0;

  normal_equations(c, jtj, jtr);
  const double det = jtj.determinant();
  const double cond_floor = 1e-14 * jtj(0, 0) * jtj(1, 1);
  if (n > 2 && det > cond_floor && det > 0) {
    const Eigen::Matrix2d cov = jtj.inverse() * (ssr / static_cast<double>(n - 2));
    const Eigen::Vector2d da(std::exp(c.lambda * tc), tc * fit.amplitude);
    fit.amplitude_stderr = std::sqrt(std::max(0.0, da.dot(cov * da)));
    fit.decay_time_stderr =
        c.lambda != 0.0 ? std::sqrt(std::max(0.0, cov(1, 1))) / (c.lambda * c.lambda) : 0.0;
    fit.stderr_available = true;
  }
  return fit;
}

double odr_objective(std::span<const double> x, std::span<const double> y, std::span<const double> sx,
                     std::span<const double> sy, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - s * x[i];
    acc += r * r / (sy[i] * sy[i] + s * s * sx[i] * sx[i]);
  }
  return acc;
}

ScaleFit fit_scale_odr(std::span<const double> x, std::span<const double> y, std::span<const double> sx,
                       std::span<const double> sy) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n || sx.size() != n || sy.size() != n) {
    throw DomainError("fit_scale_odr: inputs must have equal, non-zero length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sx[i] > 0) || !(sy[i] > 0)) throw DomainError("fit_scale_odr: sigmas must be positive");
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DomainError("fit_scale_odr: non-finite data");
  }
  if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) {
    throw DomainError("fit_scale_odr: scale undefined when every x is zero");
  }

  auto objective_at_angle = [&](double theta) { return odr_objective(x, y, sx, sy, std::tan(theta)); };

  // Coarse scan over the slope angle brackets the global minimum.
  constexpr int kScan = 1440;
  const double lo_angle = -0.5 * constants::pi;
  const double step = constants::pi / kScan;
  int best = 1;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 1; k < kScan; ++k) {
    const double v = objective_at_angle(lo_angle + k * step);
    if (v < best_val) best_val = v, best = k;
  }
  double a = lo_angle + std::max(best - 1, 0) * step;
  double b = lo_angle + std::min(best + 1, kScan) * step;
  a = std::max(a, lo_angle + 1e-12);
  b = std::min(b, 0.5 * constants::pi - 1e-12);

  // Golden section in the angle.
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = objective_at_angle(c);
  double fd = objective_at_angle(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - invphi * (b - a);
      fc = objective_at_angle(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + invphi * (b - a);
      fd = objective_at_angle(d);
    }
  }
  double s = std::tan(0.5 * (a + b));

  auto derivatives = [&](double sv, double& d1, double& d2) {
    d1 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double vx = sx[i] * sx[i];
      const double v = sy[i] * sy[i] + sv * sv * vx;
      const double r = y[i] - sv * x[i];
      d1 += -2.0 * x[i] * r / v - 2.0 * sv * vx * r * r / (v * v);
      d2 += 2.0 * x[i] * x[i] / v + 8.0 * x[i] * r * sv * vx / (v * v) - 2.0 * vx * r * r / (v * v) +
            8.0 * r * r * sv * sv * vx * vx / (v * v * v);
    }
  };

  // Newton on S'(s) = 0. S is flat to rounding near the minimum, so a step is
  // also kept when it shrinks |S'|.
  double f_best = odr_objective(x, y, sx, sy, s);
  double d1, d2;
  derivatives(s, d1, d2);
  for (int it = 0; it < 50; ++it) {
    if (!(d2 > 0) || d1 == 0.0) break;
    const double next = s - d1 / d2;
    const double f_next = odr_objective(x, y, sx, sy, next);
    double n1, n2;
    derivatives(next, n1, n2);
    if (!(f_next < f_best) && !(std::abs(n1) < std::abs(d1))) break;
    const bool done = std::abs(next - s) <= 1e-15 * std::max(std::abs(s), 1e-300);
    s = next, f_best = std::min(f_best, f_next), d1 = n1, d2 = n2;
    if (done) break;
  }
  f_best = odr_objective(x, y, sx, sy, s);

  ScaleFit fit;
  fit.scale = s;
  fit.objective = f_best;
  fit.per_point_residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.per_point_residuals[i] = (y[i] - s * x[i]) / std::sqrt(sy[i] * sy[i] + s * s * sx[i] * sx[i]);
  }
  derivatives(s, d1, d2);
  if (n > 1 && d2 > 0) {
    fit.scale_stderr = std::sqrt(2.0 / d2 * f_best / static_cast<double>(n - 1));
    fit.stderr_available = true;
  }
  return fit;
}

}  // namespace levsense
