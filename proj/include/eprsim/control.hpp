#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eprsim/noise.hpp"
#include "eprsim/qcore.hpp"

namespace eprsim {

enum class PulseKind { global_pulse, addressed_pulse, addressing_ramp, wait };

/// One timed element of a schedule.  Angles in radians, durations in
/// seconds, shifts and Rabi frequencies in Hz.  An empty target set on a
/// global pulse means "all sites".
struct PulseEvent {
    PulseKind kind = PulseKind::wait;
    Axis axis = Axis::x;
    double angle = 0.0;
    std::set<int> targets;
    double duration = 0.0;
    double shift_hz = 0.0;   // addressing shift (ramps)
    double rabi_hz = 0.0;    // drive strength (pulses)
    bool ramp_on = false;    // addressing_ramp: opening or closing
    bool virtual_frame = false;  // zero-duration frame update (virtual z)

    static PulseEvent global(Axis axis, double angle, double rabi_hz = 0.0);
    static PulseEvent addressed(Axis axis, double angle, std::set<int> targets,
                                double rabi_hz = 0.0, double duration = 0.0);
    static PulseEvent ramp(bool on, std::set<int> targets, double shift_hz,
                           double duration);
    static PulseEvent wait_for(double duration);
    static PulseEvent virtual_z(double angle);
};

/// Deferred readout request carried alongside the pulse train.
struct MeasureOp {
    double basis_angle = 0.0;
    std::set<int> targets;       // empty = all sites
    std::size_t after_event = 0; // position in the event list
};

struct Schedule {
    std::vector<PulseEvent> events;
    std::vector<MeasureOp> measurements;
    int site_count = 0;

    double total_duration() const;
};

/// Per-site response model used when turning a schedule into unitaries.
///
/// static_shift_hz is the part of a site's addressing-window shift that no
/// drive frame tracks: zero for an addressed site whose pulses are
/// resonant with the shifted transition, a small AC-shift tail for
/// bystander sites.  Its sign follows the sign of the driving ramp's
/// shift.  aux_detuning_hz is the detuning of the off-resonant drive from
/// the unshifted auxiliary state; it sets the residual z-angle bystanders
/// pick up from addressed z-pulses.
struct SiteModel {
    bool is_target = false;
    double static_shift_hz = 0.0;
    double aux_detuning_hz = 0.0;

    static SiteModel target();
    static SiteModel bystander(double static_shift_hz = 0.0,
                               double aux_detuning_hz = 0.0);
};

struct SchemeParams {
    double rabi_hz = 1000.0;             // global / addressed RF drives
    double addressing_shift_hz = 10000.0;  // plateau shift applied to targets
    double ramp_duration_s = 50e-6;
    double mw_rabi_hz = 2000.0;          // off-resonant drive for addressed z
    double target_ac_shift_hz = 1000.0;  // engineered z-rate on the target
    int site_count = 0;                  // 0 = max target + 1
};

/// Addressed x-rotation from two addressed half-pulses wrapped in a
/// global echo pair: the target composite is exactly rotation(x, theta),
/// bystander phases cancel between the two addressing windows.
Schedule scheme1_sequence(double theta, const std::set<int>& targets,
                          const SchemeParams& params = {});

/// Addressed x-rotation built from addressed z half-rotations between
/// global y(pi/2) rotations with a central x(pi) echo.  The second
/// z-pulse is emitted with flipped sign (the echo inverts the
/// accumulated logical phase) and the leftover global z(pi) is absorbed
/// by a leading virtual frame pulse, so the target composite is again
/// exactly rotation(x, theta) and bystanders compose to the identity.
Schedule scheme2_sequence(double theta, const std::set<int>& targets,
                          const SchemeParams& params = {});

/// Left-multiply the per-site unitaries of every event in time order.
/// Open addressing windows contribute a z-phase on each site at
/// 2*pi * sign(ramp shift) * static_shift_hz per second, applied ahead of
/// the event's own rotation.  Throws on malformed ramp nesting.
Unitary composite_unitary(const Schedule& s, int site, const SiteModel& model);

/// Apply the schedule to an n-site state (qubit i = site i).  With a
/// noise config, interleaves per-qubit phase damping of strength
/// duration/T2' after every event.
MixedState simulate_schedule(const Schedule& s, const MixedState& state,
                             const std::vector<SiteModel>& models,
                             const std::optional<NoiseConfig>& noise = std::nullopt);
PureState simulate_schedule(const Schedule& s, const PureState& state,
                            const std::vector<SiteModel>& models);

struct PulseWidthEntry {
    double angle = 0.0;
    double duration_s = 0.0;
    double fourier_hwhm_hz = 0.0;  // 0.443 / duration
    double shift_to_hwhm_ratio = 0.0;
};

struct CrosstalkReport {
    /// Net bystander z-phase per Hz of static shift after echo
    /// cancellation (radians); identically zero for echo-paired windows.
    double first_order_residual_rad_per_hz = 0.0;
    /// Off-resonant admixture population (Omega / 2 Delta)^2 per
    /// addressed pulse.  Reported, never applied to states.
    double leakage_per_pulse = 0.0;
    double rabi_hz = 0.0;
    double shift_hz = 0.0;
    std::vector<PulseWidthEntry> pulse_widths;
};

CrosstalkReport crosstalk_report(const Schedule& s, double rabi_hz, double shift_hz);

nlohmann::ordered_json to_json(const Schedule& s);
nlohmann::ordered_json to_json(const CrosstalkReport& r);

std::string to_string(Axis axis);

}  // namespace eprsim
