#include "eprsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace eprsim {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw std::invalid_argument(what);
    }
}

double pulse_duration(double angle, double rabi_hz) {
    if (rabi_hz <= 0.0) {
        return 0.0;
    }
    return std::abs(angle) / (two_pi * rabi_hz);
}

struct OpenWindow {
    std::set<int> targets;
    double shift_hz = 0.0;
};

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Bystander z-angle induced by an addressed z-pulse: AC-Zeeman shift
/// rabi^2 / (4 delta) for the unshifted auxiliary state.
double bystander_z_angle(const PulseEvent& e, const SiteModel& model) {
    if (model.aux_detuning_hz == 0.0 || e.rabi_hz <= 0.0 || e.duration <= 0.0) {
        return 0.0;
    }
    const double shift_hz = e.rabi_hz * e.rabi_hz / (4.0 * model.aux_detuning_hz);
    return two_pi * shift_hz * e.duration;
}

CMat event_site_unitary(const PulseEvent& e, int site, const SiteModel& model) {
    switch (e.kind) {
        case PulseKind::global_pulse:
            if (e.targets.empty() || e.targets.count(site) > 0) {
                return rotation(e.axis, e.angle).matrix;
            }
            return CMat::Identity(2, 2);
        case PulseKind::addressed_pulse:
            if (e.targets.count(site) > 0) {
                return rotation(e.axis, e.angle).matrix;
            }
            if (e.axis == Axis::z) {
                return rotation(Axis::z, bystander_z_angle(e, model)).matrix;
            }
            return CMat::Identity(2, 2);  // leakage is reported, not applied
        case PulseKind::addressing_ramp:
        case PulseKind::wait:
            return CMat::Identity(2, 2);
    }
    return CMat::Identity(2, 2);
}

/// Walk the schedule once in time order, maintaining ramp-window state
/// and validating nesting.  For each event, `visit` receives the event
/// and the signed plateau-equivalent duration: the sum over addressing
/// windows of sign(window shift) * duration, with this event's own ramp
/// (rising or falling) weighted by 1/2 for its linear segment.  A site's
/// accrued z-phase for the event is 2*pi * static_shift_hz * that value.
template <typename Visit>
void walk_schedule(const Schedule& s, Visit&& visit) {
    std::vector<OpenWindow> windows;
    for (const auto& e : s.events) {
        double self_weight = 0.0;  // signed half-duration of this event's ramp
        if (e.kind == PulseKind::addressing_ramp) {
            if (e.ramp_on) {
                self_weight = 0.5 * sign_of(e.shift_hz) * e.duration;
            } else {
                auto it = std::find_if(windows.begin(), windows.end(),
                                       [&](const OpenWindow& w) {
                                           return w.targets == e.targets;
                                       });
                require(it != windows.end(),
                        "schedule: ramp off without matching ramp on");
                self_weight = 0.5 * sign_of(it->shift_hz) * e.duration;
                windows.erase(it);
            }
        }
        double signed_duration = self_weight;
        for (const auto& w : windows) {
            signed_duration += sign_of(w.shift_hz) * e.duration;
        }
        visit(e, signed_duration);
        if (e.kind == PulseKind::addressing_ramp && e.ramp_on) {
            windows.push_back({e.targets, e.shift_hz});
        }
    }
    require(windows.empty(), "schedule: addressing ramp never closed");
}

}  // namespace

PulseEvent PulseEvent::global(Axis axis, double angle, double rabi_hz) {
    PulseEvent e;
    e.kind = PulseKind::global_pulse;
    e.axis = axis;
    e.angle = angle;
    e.rabi_hz = rabi_hz;
    e.duration = pulse_duration(angle, rabi_hz);
    return e;
}

PulseEvent PulseEvent::addressed(Axis axis, double angle, std::set<int> targets,
                                 double rabi_hz, double duration) {
    require(!targets.empty(), "addressed pulse requires a non-empty target set");
    PulseEvent e;
    e.kind = PulseKind::addressed_pulse;
    e.axis = axis;
    e.angle = angle;
    e.targets = std::move(targets);
    e.rabi_hz = rabi_hz;
    e.duration = duration > 0.0 ? duration : pulse_duration(angle, rabi_hz);
    return e;
}

PulseEvent PulseEvent::ramp(bool on, std::set<int> targets, double shift_hz,
                            double duration) {
    require(!targets.empty(), "ramp requires a non-empty target set");
    require(duration >= 0.0, "ramp duration must be non-negative");
    PulseEvent e;
    e.kind = PulseKind::addressing_ramp;
    e.ramp_on = on;
    e.targets = std::move(targets);
    e.shift_hz = shift_hz;
    e.duration = duration;
    return e;
}

PulseEvent PulseEvent::wait_for(double duration) {
    require(duration >= 0.0, "wait duration must be non-negative");
    PulseEvent e;
    e.kind = PulseKind::wait;
    e.duration = duration;
    return e;
}

PulseEvent PulseEvent::virtual_z(double angle) {
    PulseEvent e;
    e.kind = PulseKind::global_pulse;
    e.axis = Axis::z;
    e.angle = angle;
    e.duration = 0.0;
    e.virtual_frame = true;
    return e;
}

double Schedule::total_duration() const {
    double t = 0.0;
    for (const auto& e : events) {
        t += e.duration;
    }
    return t;
}

SiteModel SiteModel::target() { return SiteModel{true, 0.0, 0.0}; }

SiteModel SiteModel::bystander(double static_shift_hz, double aux_detuning_hz) {
    return SiteModel{false, static_shift_hz, aux_detuning_hz};
}

namespace {

int auto_site_count(const std::set<int>& targets, const SchemeParams& params) {
    if (params.site_count > 0) {
        return params.site_count;
    }
    return *targets.rbegin() + 1;
}

void append_addressed_window(Schedule& s, Axis axis, double angle,
                             const std::set<int>& targets, double rabi,
                             double duration, const SchemeParams& p) {
    s.events.push_back(
        PulseEvent::ramp(true, targets, p.addressing_shift_hz, p.ramp_duration_s));
    s.events.push_back(PulseEvent::addressed(axis, angle, targets, rabi, duration));
    s.events.push_back(
        PulseEvent::ramp(false, targets, p.addressing_shift_hz, p.ramp_duration_s));
}

}  // namespace

Schedule scheme1_sequence(double theta, const std::set<int>& targets,
                          const SchemeParams& params) {
    require(!targets.empty(), "scheme1_sequence: empty target set");
    require(std::isfinite(theta) && std::abs(theta) <= 2.0 * std::numbers::pi,
            "scheme1_sequence: theta outside [-2pi, 2pi]");
    Schedule s;
    s.site_count = auto_site_count(targets, params);
    const double half = theta / 2.0;
    const double pi = std::numbers::pi;

    s.events.push_back(PulseEvent::global(Axis::x, -pi, params.rabi_hz));
    append_addressed_window(s, Axis::x, half, targets, params.rabi_hz,
                            pulse_duration(half, params.rabi_hz), params);
    s.events.push_back(PulseEvent::global(Axis::x, pi, params.rabi_hz));
    append_addressed_window(s, Axis::x, half, targets, params.rabi_hz,
                            pulse_duration(half, params.rabi_hz), params);
    return s;
}

Schedule scheme2_sequence(double theta, const std::set<int>& targets,
                          const SchemeParams& params) {
    require(!targets.empty(), "scheme2_sequence: empty target set");
    require(std::isfinite(theta) && std::abs(theta) <= 2.0 * std::numbers::pi,
            "scheme2_sequence: theta outside [-2pi, 2pi]");
    Schedule s;
    s.site_count = auto_site_count(targets, params);
    const double half = theta / 2.0;
    const double pi = std::numbers::pi;
    // Both z half-pulses run for the same time; the sign flip on the
    // second one comes from inverting the target's laser-controlled
    // detuning, so bystander phases stay equal in both halves.
    const double z_duration = pulse_duration(half, params.target_ac_shift_hz);

    s.events.push_back(PulseEvent::virtual_z(-pi));
    s.events.push_back(PulseEvent::global(Axis::y, pi / 2.0, params.rabi_hz));
    append_addressed_window(s, Axis::z, half, targets, params.mw_rabi_hz, z_duration,
                            params);
    s.events.push_back(PulseEvent::global(Axis::x, pi, params.rabi_hz));
    append_addressed_window(s, Axis::z, -half, targets, params.mw_rabi_hz, z_duration,
                            params);
    s.events.push_back(PulseEvent::global(Axis::y, -pi / 2.0, params.rabi_hz));
    return s;
}

namespace {

/// Per-site 2x2 unitary for one event: addressing z-phase (applied
/// first), then the event's own rotation.
CMat event_unitary_with_phase(const PulseEvent& e, int site, const SiteModel& model,
                              double signed_duration) {
    CMat u = event_site_unitary(e, site, model);
    const double phase = two_pi * model.static_shift_hz * signed_duration;
    if (phase != 0.0) {
        u = u * rotation(Axis::z, phase).matrix;
    }
    return u;
}

}  // namespace

Unitary composite_unitary(const Schedule& s, int site, const SiteModel& model) {
    require(site >= 0 && site < s.site_count, "composite_unitary: site out of range");
    CMat u = CMat::Identity(2, 2);
    walk_schedule(s, [&](const PulseEvent& e, double signed_duration) {
        u = event_unitary_with_phase(e, site, model, signed_duration) * u;
    });
    return Unitary{2, u};
}

MixedState simulate_schedule(const Schedule& s, const MixedState& state,
                             const std::vector<SiteModel>& models,
                             const std::optional<NoiseConfig>& noise) {
    require(state.n_qubits == s.site_count,
            "simulate_schedule: state size does not match site count");
    require(models.size() == static_cast<std::size_t>(s.site_count),
            "simulate_schedule: one SiteModel per site required");
    MixedState out = state;
    walk_schedule(s, [&](const PulseEvent& e, double signed_duration) {
        for (int site = 0; site < s.site_count; ++site) {
            Unitary raw;
            raw.dim = 2;
            raw.matrix = event_unitary_with_phase(e, site, models[site], signed_duration);
            out = apply(embed(raw, {site}, s.site_count), out);
        }
        if (noise && e.duration > 0.0) {
            out = apply_noise_channels(out, *noise, e.duration);
        }
    });
    return out;
}

PureState simulate_schedule(const Schedule& s, const PureState& state,
                            const std::vector<SiteModel>& models) {
    require(state.n_qubits == s.site_count,
            "simulate_schedule: state size does not match site count");
    require(models.size() == static_cast<std::size_t>(s.site_count),
            "simulate_schedule: one SiteModel per site required");
    PureState out = state;
    walk_schedule(s, [&](const PulseEvent& e, double signed_duration) {
        for (int site = 0; site < s.site_count; ++site) {
            Unitary raw;
            raw.dim = 2;
            raw.matrix = event_unitary_with_phase(e, site, models[site], signed_duration);
            out = apply(embed(raw, {site}, s.site_count), out);
        }
    });
    return out;
}

CrosstalkReport crosstalk_report(const Schedule& s, double rabi_hz, double shift_hz) {
    require(shift_hz > 0.0, "crosstalk_report: shift must be positive");
    CrosstalkReport r;
    r.rabi_hz = rabi_hz;
    r.shift_hz = shift_hz;
    r.leakage_per_pulse = std::pow(rabi_hz / (2.0 * shift_hz), 2.0);

    // Toggling-frame residual: each global x pi-pulse inverts the sign of
    // later static phases; echo-paired windows therefore sum to zero.
    double sign = 1.0;
    double residual = 0.0;
    walk_schedule(s, [&](const PulseEvent& e, double signed_duration) {
        residual += sign * two_pi * signed_duration;
        if (e.kind == PulseKind::global_pulse && e.axis == Axis::x &&
            std::abs(std::abs(e.angle) - std::numbers::pi) < 1e-9) {
            sign = -sign;
        }
        if (e.kind == PulseKind::addressed_pulse && e.duration > 0.0) {
            PulseWidthEntry entry;
            entry.angle = e.angle;
            entry.duration_s = e.duration;
            entry.fourier_hwhm_hz = 0.443 / e.duration;
            entry.shift_to_hwhm_ratio = shift_hz / entry.fourier_hwhm_hz;
            r.pulse_widths.push_back(entry);
        }
    });
    r.first_order_residual_rad_per_hz = residual;
    return r;
}

std::string to_string(Axis axis) {
    switch (axis) {
        case Axis::x:
            return "x";
        case Axis::y:
            return "y";
        case Axis::z:
            return "z";
    }
    return "?";
}

nlohmann::ordered_json to_json(const Schedule& s) {
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const auto& e : s.events) {
        nlohmann::ordered_json je;
        switch (e.kind) {
            case PulseKind::global_pulse:
                je["kind"] = "global_pulse";
                break;
            case PulseKind::addressed_pulse:
                je["kind"] = "addressed_pulse";
                break;
            case PulseKind::addressing_ramp:
                je["kind"] = "addressing_ramp";
                je["ramp_on"] = e.ramp_on;
                break;
            case PulseKind::wait:
                je["kind"] = "wait";
                break;
        }
        if (e.kind == PulseKind::global_pulse || e.kind == PulseKind::addressed_pulse) {
            je["axis"] = to_string(e.axis);
            je["angle_rad"] = e.angle;
            if (e.rabi_hz > 0.0) {
                je["rabi_hz"] = e.rabi_hz;
            }
            if (e.virtual_frame) {
                je["virtual"] = true;
            }
        }
        if (e.kind == PulseKind::addressing_ramp) {
            je["shift_hz"] = e.shift_hz;
        }
        if (!e.targets.empty()) {
            je["targets"] = e.targets;
        }
        je["duration_s"] = e.duration;
        events.push_back(je);
    }
    nlohmann::ordered_json out;
    out["site_count"] = s.site_count;
    out["events"] = events;
    if (!s.measurements.empty()) {
        nlohmann::ordered_json ms = nlohmann::ordered_json::array();
        for (const auto& m : s.measurements) {
            ms.push_back({{"basis_angle_rad", m.basis_angle},
                          {"targets", m.targets},
                          {"after_event", m.after_event}});
        }
        out["measurements"] = ms;
    }
    out["total_duration_s"] = s.total_duration();
    return out;
}

nlohmann::ordered_json to_json(const CrosstalkReport& r) {
    nlohmann::ordered_json pulses = nlohmann::ordered_json::array();
    for (const auto& p : r.pulse_widths) {
        pulses.push_back({{"angle_rad", p.angle},
                          {"duration_s", p.duration_s},
                          {"fourier_hwhm_hz", p.fourier_hwhm_hz},
                          {"shift_to_hwhm_ratio", p.shift_to_hwhm_ratio}});
    }
    return {{"first_order_residual_rad_per_hz", r.first_order_residual_rad_per_hz},
            {"leakage_per_pulse", r.leakage_per_pulse},
            {"rabi_hz", r.rabi_hz},
            {"shift_hz", r.shift_hz},
            {"pulse_widths", pulses}};
}

}  // namespace eprsim
