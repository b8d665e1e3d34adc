#include "bgd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "bgd/error.hpp"
#include "bgd/io.hpp"

namespace bgd {
namespace {

// Closed-form tables cost O(T^2); beyond this the recursion takes over.
constexpr int kClosedFormMaxT = 10000;

void check_step(const NoiseSchedule& s, int t) {
  if (t < 1 || t > s.T) {
    throw InvalidArgument("step " + std::to_string(t) + " outside [1, " + std::to_string(s.T) +
                          "]");
  }
}

void check_bit(int b, const char* name) {
  if (b != 0 && b != 1) throw InvalidArgument(std::string(name) + " must be 0 or 1");
}

// A 0 can only become 1 once some beta0 fired, and vice versa. These two
// marginals are exactly 0 / 1 until then; the alternating closed-form sum only
// reproduces that up to rounding, so they are pinned.
bool stuck_at_initial(const NoiseSchedule& s, int t, int x0) {
  const auto& flips = x0 ? s.beta1 : s.beta0;
  return std::all_of(flips.begin(), flips.begin() + t, [](double b) { return b == 0.0; });
}

}  // namespace

NoiseSchedule make_schedule(std::vector<double> beta0, std::vector<double> beta1) {
  if (beta0.size() != beta1.size()) throw InvalidArgument("beta0/beta1 length mismatch");
  if (beta0.empty()) throw InvalidArgument("schedule needs at least one step");
  for (std::size_t i = 0; i < beta0.size(); ++i) {
    for (double b : {beta0[i], beta1[i]}) {
      if (!(b >= 0.0 && b <= 0.5)) {
        throw InvalidArgument("beta at step " + std::to_string(i + 1) + " outside [0, 1/2]");
      }
    }
  }
  NoiseSchedule s;
  s.T = static_cast<int>(beta0.size());
  s.p0 = beta0.back();
  s.p1 = beta1.back();
  s.beta0 = std::move(beta0);
  s.beta1 = std::move(beta1);
  return s;
}

NoiseSchedule ramp_schedule(double p0, double p1, int T, double ramp_frac) {
  if (T < 2) throw InvalidArgument("T must be >= 2");
  if (!(ramp_frac > 0.0 && ramp_frac <= 1.0)) throw InvalidArgument("ramp_frac outside (0, 1]");
  if (!(p0 >= 0.0 && p0 <= 0.5 && p1 >= 0.0 && p1 <= 0.5)) {
    throw InvalidArgument("plateau values must lie in [0, 1/2]");
  }
  std::vector<double> b0(static_cast<std::size_t>(T)), b1(static_cast<std::size_t>(T));
  const double ramp_len = ramp_frac * T;
  for (int t = 1; t <= T; ++t) {
    const double f = std::min(1.0, t / ramp_len);
    b0[static_cast<std::size_t>(t - 1)] = p0 * f;
    b1[static_cast<std::size_t>(t - 1)] = p1 * f;
  }
  return make_schedule(std::move(b0), std::move(b1));
}

NoiseSchedule build_schedule(double prior_p, double scale_c, int T, double ramp_frac) {
  if (!(prior_p >= 0.0 && prior_p <= 1.0)) throw InvalidArgument("prior_p outside [0, 1]");
  if (!(scale_c > 0.0 && scale_c <= 0.5)) throw InvalidArgument("scale_c outside (0, 1/2]");
  return ramp_schedule(scale_c * prior_p, scale_c * (1.0 - prior_p), T, ramp_frac);
}

NoiseSchedule constant_schedule(double beta0, double beta1, int T) {
  if (T < 1) throw InvalidArgument("T must be >= 1");
  return make_schedule(std::vector<double>(static_cast<std::size_t>(T), beta0),
                       std::vector<double>(static_cast<std::size_t>(T), beta1));
}

double forward_prob(const NoiseSchedule& s, int t, int x0) {
  check_step(s, t);
  check_bit(x0, "x0");
  if (stuck_at_initial(s, t, x0)) return x0;

  // q = [t odd] + sum_i (-1)^i (eps_i^{[i even]} / 2) prod_{j>i} eps_bar_j / 2
  //       + x0 prod_{j<=t} eps_bar_j / 2
  // with eps^b / 2 = 1 - beta^b and eps_bar / 2 = 1 - beta0 - beta1.
  double sum = 0.0;
  double tail = 1.0;
  for (int i = t; i >= 1; --i) {
    const bool even = (i % 2 == 0);
    const double half_eps = even ? 1.0 - s.flip_to_zero(i) : 1.0 - s.flip_to_one(i);
    sum += (even ? half_eps : -half_eps) * tail;
    tail *= 1.0 - s.flip_to_one(i) - s.flip_to_zero(i);
  }
  const double base = (t % 2 == 1) ? 1.0 : 0.0;
  return base + sum + x0 * tail;
}

double forward_prob_oracle(const NoiseSchedule& s, int t, int x0) {
  check_step(s, t);
  check_bit(x0, "x0");
  double q = x0;
  for (int j = 1; j <= t; ++j) {
    q = q * (1.0 - s.flip_to_zero(j)) + (1.0 - q) * s.flip_to_one(j);
  }
  return q;
}

double prior_prob(const NoiseSchedule& s) {
  const double total = s.p0 + s.p1;
  if (!(total > 0.0)) throw DegenerateSchedule("p0 + p1 = 0: schedule never mixes");
  return s.p0 / total;
}

KernelTables build_tables(const NoiseSchedule& s) {
  const auto n = static_cast<std::size_t>(s.T) + 1;
  KernelTables tab;
  tab.q_from0.resize(n);
  tab.q_from1.resize(n);
  tab.signal.resize(n);
  tab.q_from0[0] = 0.0;
  tab.q_from1[0] = 1.0;
  tab.signal[0] = 1.0;
  for (int t = 1; t <= s.T; ++t) {
    const auto k = static_cast<std::size_t>(t);
    tab.signal[k] = tab.signal[k - 1] * (1.0 - s.flip_to_one(t) - s.flip_to_zero(t));
    if (s.T <= kClosedFormMaxT) {
      tab.q_from0[k] = forward_prob(s, t, 0);
      tab.q_from1[k] = forward_prob(s, t, 1);
    } else {
      tab.q_from0[k] = tab.q_from0[k - 1] * (1.0 - s.flip_to_zero(t)) +
                       (1.0 - tab.q_from0[k - 1]) * s.flip_to_one(t);
      tab.q_from1[k] = tab.q_from1[k - 1] * (1.0 - s.flip_to_zero(t)) +
                       (1.0 - tab.q_from1[k - 1]) * s.flip_to_one(t);
    }
  }
  return tab;
}

bool conditioning_impossible(const KernelTables& tables, int t, int xt, int x0) {
  const double q = tables.q(t, x0);
  return !((xt ? q : 1.0 - q) > 0.0);
}

double posterior_prob(const NoiseSchedule& s, const KernelTables& tables, int t, int xt, int x0) {
  check_step(s, t);
  check_bit(xt, "xt");
  check_bit(x0, "x0");
  if (tables.T() != s.T) throw InvalidArgument("tables do not match schedule");
  if (conditioning_impossible(tables, t, xt, x0)) {
    throw ConditioningImpossible("x_" + std::to_string(t) + " = " + std::to_string(xt) +
                                 " cannot occur from x_0 = " + std::to_string(x0));
  }
  if (t == 1) return x0;
  const double b1 = s.flip_to_zero(t);
  const double likelihood = xt ? 1.0 - b1 : b1;  // P(x_t | x_{t-1} = 1)
  const double prev = tables.q(t - 1, x0);       // P(x_{t-1} = 1 | x_0)
  const double q = tables.q(t, x0);
  const double evidence = xt ? q : 1.0 - q;  // P(x_t | x_0)
  return likelihood * prev / evidence;
}

Bits sample_forward(const KernelTables& tables, std::span<const std::uint8_t> x0_bits, int t,
                    Rng& rng) {
  if (t < 1 || t > tables.T()) throw InvalidArgument("step outside [1, T]");
  Bits out(x0_bits.size());
  const double q0 = tables.q(t, 0);
  const double q1 = tables.q(t, 1);
  for (std::size_t i = 0; i < x0_bits.size(); ++i) {
    out[i] = rng.bernoulli(x0_bits[i] ? q1 : q0) ? 1 : 0;
  }
  return out;
}

double signal_remaining(const KernelTables& tables, int t) {
  if (t < 0 || t > tables.T()) throw InvalidArgument("step outside [0, T]");
  return tables.signal[static_cast<std::size_t>(t)];
}

void write_tables_csv(const NoiseSchedule& s, const KernelTables& tables,
                      const std::filesystem::path& path) {
  std::ostringstream out;
  out << "t,beta0,beta1,q_from0,q_from1,signal\n";
  for (int t = 0; t <= tables.T(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    out << t << ',' << format_csv(t ? s.flip_to_one(t) : 0.0) << ','
        << format_csv(t ? s.flip_to_zero(t) : 0.0) << ',' << format_csv(tables.q_from0[k]) << ','
        << format_csv(tables.q_from1[k]) << ',' << format_csv(tables.signal[k]) << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace bgd
