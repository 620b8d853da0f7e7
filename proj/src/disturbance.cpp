#include "qrate/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qrate {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool cond, const char* what) {
    if (!cond) {
        throw std::invalid_argument(what);
    }
}

Vector uniform_sample(const SeededUniformSignal& s, std::int64_t slot, std::size_t channels) {
    const auto m = static_cast<std::uint64_t>(slot);
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                      static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(m >> 32)};
    std::mt19937_64 gen(seq);
    Vector v(channels);
    for (double& x : v) {
        // 53 random mantissa bits; portable across standard libraries.
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        x = s.bound * (2.0 * u - 1.0);
    }
    return v;
}

std::int64_t slot_of(double t, double hold) { return static_cast<std::int64_t>(std::floor(t / hold)); }

}  // namespace

DisturbanceSignal::DisturbanceSignal(std::size_t channels, Kind kind) : channels_(channels), kind_(std::move(kind)) {
    require(channels_ > 0, "disturbance: at least one channel");
    std::visit(overloaded{
                   [](const ZeroSignal&) {},
                   [&](const ConstantSignal& c) {
                       require(c.level.size() == channels_, "disturbance: constant level must have n_d entries");
                   },
                   [&](const PulseTrainSignal& p) {
                       double last_end = -std::numeric_limits<double>::infinity();
                       for (const Pulse& pulse : p.pulses) {
                           require(pulse.level.size() == channels_, "disturbance: pulse level must have n_d entries");
                           require(pulse.start < pulse.end, "disturbance: pulse must have start < end");
                           require(pulse.start >= last_end, "disturbance: pulses must be ordered and disjoint");
                           last_end = pulse.end;
                       }
                   },
                   [&](const SinusoidSignal& s) {
                       require(s.amplitude.size() == channels_, "disturbance: amplitude must have n_d entries");
                       require(s.frequency_hz >= 0.0, "disturbance: frequency must be nonnegative");
                   },
                   [](const SeededUniformSignal& s) {
                       require(s.bound >= 0.0, "disturbance: bound must be nonnegative");
                       require(s.hold > 0.0, "disturbance: hold interval must be positive");
                   },
               },
               kind_);
}

std::string DisturbanceSignal::kind_name() const {
    return std::visit(overloaded{
                          [](const ZeroSignal&) { return std::string("zero"); },
                          [](const ConstantSignal&) { return std::string("constant"); },
                          [](const PulseTrainSignal&) { return std::string("pulse_train"); },
                          [](const SinusoidSignal&) { return std::string("sinusoid"); },
                          [](const SeededUniformSignal&) { return std::string("seeded_uniform"); },
                      },
                      kind_);
}

Vector DisturbanceSignal::value(double t) const {
    return std::visit(overloaded{
                          [&](const ZeroSignal&) { return Vector(channels_, 0.0); },
                          [&](const ConstantSignal& c) { return c.level; },
                          [&](const PulseTrainSignal& p) {
                              for (const Pulse& pulse : p.pulses) {
                                  if (pulse.start <= t && t < pulse.end) {
                                      return pulse.level;
                                  }
                              }
                              return Vector(channels_, 0.0);
                          },
                          [&](const SinusoidSignal& s) {
                              const double w = std::sin(2.0 * std::numbers::pi * s.frequency_hz * t + s.phase);
                              Vector v(channels_);
                              for (std::size_t i = 0; i < channels_; ++i) {
                                  v[i] = s.amplitude[i] * w;
                              }
                              return v;
                          },
                          [&](const SeededUniformSignal& s) {
                              return uniform_sample(s, slot_of(t, s.hold), channels_);
                          },
                      },
                      kind_);
}

double DisturbanceSignal::sup_norm_on(double a, double b) const {
    if (b < a) {
        throw std::invalid_argument("sup_norm_on: reversed interval");
    }
    if (a == b) {
        return inf_norm(value(a));
    }
    return std::visit(
        overloaded{
            [](const ZeroSignal&) { return 0.0; },
            [](const ConstantSignal& c) { return inf_norm(c.level); },
            [&](const PulseTrainSignal& p) {
                double best = 0.0;
                for (const Pulse& pulse : p.pulses) {
                    if (std::max(a, pulse.start) < std::min(b, pulse.end)) {
                        best = std::max(best, inf_norm(pulse.level));
                    }
                }
                return best;
            },
            [&](const SinusoidSignal& s) {
                const double amp = inf_norm(s.amplitude);
                const double w = 2.0 * std::numbers::pi * s.frequency_hz;
                const double ta = w * a + s.phase;
                const double tb = w * b + s.phase;
                // |sin| peaks at pi/2 + m pi.
                const double m = std::ceil((ta - std::numbers::pi / 2.0) / std::numbers::pi);
                if (std::numbers::pi / 2.0 + m * std::numbers::pi <= tb) {
                    return amp;
                }
                return amp * std::max(std::abs(std::sin(ta)), std::abs(std::sin(tb)));
            },
            [&](const SeededUniformSignal& s) {
                double best = 0.0;
                const std::int64_t first = slot_of(a, s.hold);
                const auto last = static_cast<std::int64_t>(std::ceil(b / s.hold)) - 1;
                for (std::int64_t m = first; m <= std::max(first, last); ++m) {
                    best = std::max(best, inf_norm(uniform_sample(s, m, channels_)));
                }
                return best;
            },
        },
        kind_);
}

bool DisturbanceSignal::piecewise_constant() const noexcept {
    return !std::holds_alternative<SinusoidSignal>(kind_);
}

std::vector<double> DisturbanceSignal::breakpoints(double a, double b) const {
    std::vector<double> out;
    auto keep = [&](double t) {
        if (a < t && t < b) {
            out.push_back(t);
        }
    };
    if (const auto* p = std::get_if<PulseTrainSignal>(&kind_)) {
        for (const Pulse& pulse : p->pulses) {
            keep(pulse.start);
            keep(pulse.end);
        }
    } else if (const auto* s = std::get_if<SeededUniformSignal>(&kind_)) {
        for (std::int64_t m = slot_of(a, s->hold) + 1; static_cast<double>(m) * s->hold < b; ++m) {
            keep(static_cast<double>(m) * s->hold);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> DisturbanceSignal::onsets(double horizon) const {
    std::vector<double> out;
    if (const auto* p = std::get_if<PulseTrainSignal>(&kind_)) {
        for (const Pulse& pulse : p->pulses) {
            if (pulse.start <= horizon && inf_norm(pulse.level) > 0.0) {
                out.push_back(pulse.start);
            }
        }
    }
    return out;
}

void DisturbanceSignal::reseed(std::uint64_t seed) {
    if (auto* s = std::get_if<SeededUniformSignal>(&kind_)) {
        s->seed = seed;
    }
}

bool operator==(const DisturbanceSignal& a, const DisturbanceSignal& b) {
    if (a.channels_ != b.channels_ || a.kind_.index() != b.kind_.index()) {
        return false;
    }
    return std::visit(overloaded{
                          [](const ZeroSignal&) { return true; },
                          [&](const ConstantSignal& c) { return c.level == std::get<ConstantSignal>(b.kind_).level; },
                          [&](const PulseTrainSignal& p) {
                              const auto& q = std::get<PulseTrainSignal>(b.kind_).pulses;
                              return std::equal(p.pulses.begin(), p.pulses.end(), q.begin(), q.end(),
                                                [](const Pulse& x, const Pulse& y) {
                                                    return x.start == y.start && x.end == y.end && x.level == y.level;
                                                });
                          },
                          [&](const SinusoidSignal& s) {
                              const auto& o = std::get<SinusoidSignal>(b.kind_);
                              return s.amplitude == o.amplitude && s.frequency_hz == o.frequency_hz &&
                                     s.phase == o.phase;
                          },
                          [&](const SeededUniformSignal& s) {
                              const auto& o = std::get<SeededUniformSignal>(b.kind_);
                              return s.bound == o.bound && s.seed == o.seed && s.hold == o.hold;
                          },
                      },
                      a.kind_);
}

double sup_norm_on(const DisturbanceSignal& sig, double a, double b) { return sig.sup_norm_on(a, b); }

}  // namespace qrate
