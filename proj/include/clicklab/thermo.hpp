#pragma once

#include <cstdint>
#include <vector>

namespace clicklab {

// Lumped thermal model of a cold capsule suspended above a liquid nitrogen
// bath: one heat capacity, one conductance to the 77 K bath, one heater.
struct ThermalPlant {
    double heat_capacity_j_per_k = 500.0;
    double conductance_w_per_k = 0.056;
    double bath_t_k = 77.0;
    double heater_max_w = 12.0;
    double sensor_noise_k = 0.0;  // rms readout noise seen by the controller

    void check() const;  // throws ConfigError on nonpositive C or G
};

// One explicit Euler step: T += dt * (power - G * (T - bath)) / C.
double plant_step(double t_k, double power_w, double dt_s,
                  const ThermalPlant& plant);

// Closed-form temperature of the plant after dt at constant power, used as
// a reference for the discrete integrator.
double plant_exact(double t0_k, double power_w, double dt_s,
                   const ThermalPlant& plant);

struct PidController {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    double sample_period_s = 0.1;
    double output_min_w = 0.0;
    double output_max_w = 12.0;

    // state
    double integral_w = 0.0;
    double prev_error_k = 0.0;
    bool has_prev_error = false;

    void reset();
};

// One controller update. Output is clamped to [output_min_w, output_max_w];
// the integral term does not accumulate while the clamp is active and the
// error keeps pushing into it (conditional anti-windup).
double pid_step(PidController& pid, double setpoint_k, double measured_k);

struct ControlTracePoint {
    double t_s = 0.0;
    double temperature_k = 0.0;
    double power_w = 0.0;
};

struct ControlRunSummary {
    bool settled = false;
    double settling_time_s = 0.0;     // last excursion out of the band
    double steady_mean_t_k = 0.0;
    double steady_peak_to_peak_k = 0.0;
    double steady_mean_power_w = 0.0;
};

struct ControlRunResult {
    std::vector<ControlTracePoint> trace;
    ControlRunSummary summary;
};

// Closed-loop run from start_t_k. The plant advances with step dt_s; the
// controller updates every sample_period_s on the noisy readout and its
// output is held between updates. A run counts as settled once the true
// temperature stays within settle_band_k of the setpoint until the end,
// and the steady-state statistics cover that final stretch.
// Throws AnalysisError when dt_s is not well below the plant time constant
// (dt_s >= 0.1 C / G) or not positive.
ControlRunResult simulate_control_run(const ThermalPlant& plant,
                                      PidController pid, double setpoint_k,
                                      double start_t_k, double duration_s,
                                      double dt_s, std::uint64_t seed,
                                      double settle_band_k = 0.05);

inline constexpr double ln2_latent_heat_j_per_kg = 199e3;

struct Ln2Budget {
    double boiloff_w = 0.0;           // heater steady load plus parasitics
    double evaporation_g_per_h = 0.0;
    double endurance_h = 0.0;         // fill mass over evaporation rate
};

// Steady-state nitrogen consumption while holding t_op_k.
Ln2Budget ln2_budget(const ThermalPlant& plant, double t_op_k,
                     double parasitic_w, double fill_kg);

}
