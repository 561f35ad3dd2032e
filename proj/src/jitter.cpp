#include "tsnsim/jitter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tsnsim {

namespace {
template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTruncSigmas = 4.0;
constexpr int kMaxRejections = 1000;

double normal_lo(const JitterDist::Normal &n)
{
    double lo = n.mean - kTruncSigmas * n.stddev;
    if (n.lower)
        lo = std::max(lo, static_cast<double>(*n.lower));
    return lo;
}
double normal_hi(const JitterDist::Normal &n) { return n.mean + kTruncSigmas * n.stddev; }
} // namespace

JitterDist::JitterDist(Kind kind) : kind_(std::move(kind)) {}

Duration JitterDist::sample(Rng &rng) const
{
    return std::visit(
        overloaded{
            [](const Constant &c) { return c.value; },
            [&](const Uniform &u) { return rng.uniform_int(u.min, u.max); },
            [&](const Normal &n) -> Duration {
                if (n.stddev <= 0.0)
                    return std::llround(std::max(n.mean, normal_lo(n)));
                const double lo = normal_lo(n);
                const double hi = normal_hi(n);
                for (int i = 0; i < kMaxRejections; ++i) {
                    const double z = rng.standard_normal();
                    if (std::abs(z) > kTruncSigmas)
                        continue;
                    const double x = n.mean + n.stddev * z;
                    if (x < lo)
                        continue;
                    return std::llround(x);
                }
                // Lower bound far in the upper tail: fall back to the bound.
                return std::llround(std::min(lo, hi));
            },
            [&](const Empirical &e) -> Duration {
                double total = 0.0;
                for (const auto &[v, w] : e.points)
                    total += w;
                double r = rng.uniform01() * total;
                for (const auto &[v, w] : e.points) {
                    if (r < w)
                        return v;
                    r -= w;
                }
                return e.points.back().first;
            },
        },
        kind_);
}

Duration JitterDist::lower_bound() const
{
    return std::visit(overloaded{
                          [](const Constant &c) { return c.value; },
                          [](const Uniform &u) { return u.min; },
                          [](const Normal &n) -> Duration {
                              if (n.stddev <= 0.0)
                                  return std::llround(std::max(n.mean, normal_lo(n)));
                              return std::llround(normal_lo(n));
                          },
                          [](const Empirical &e) {
                              Duration lo = e.points.front().first;
                              for (const auto &p : e.points)
                                  lo = std::min(lo, p.first);
                              return lo;
                          },
                      },
                      kind_);
}

Duration JitterDist::upper_bound() const
{
    return std::visit(overloaded{
                          [](const Constant &c) { return c.value; },
                          [](const Uniform &u) { return u.max; },
                          [](const Normal &n) -> Duration {
                              if (n.stddev <= 0.0)
                                  return std::llround(std::max(n.mean, normal_lo(n)));
                              return std::llround(std::max(normal_hi(n), normal_lo(n)));
                          },
                          [](const Empirical &e) {
                              Duration hi = e.points.front().first;
                              for (const auto &p : e.points)
                                  hi = std::max(hi, p.first);
                              return hi;
                          },
                      },
                      kind_);
}

bool JitterDist::is_zero() const { return lower_bound() == 0 && upper_bound() == 0; }

std::string JitterDist::describe() const
{
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Constant &c) { os << "constant(" << c.value << ")"; },
                   [&](const Uniform &u) { os << "uniform(" << u.min << "," << u.max << ")"; },
                   [&](const Normal &n) {
                       os << "normal(" << n.mean << "," << n.stddev;
                       if (n.lower)
                           os << ",lower=" << *n.lower;
                       os << ")";
                   },
                   [&](const Empirical &e) { os << "empirical(" << e.points.size() << " points)"; },
               },
               kind_);
    return os.str();
}

} // namespace tsnsim
