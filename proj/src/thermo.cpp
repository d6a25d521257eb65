#include "clicklab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clicklab/errors.hpp"
#include "clicklab/rng.hpp"

namespace clicklab {

void ThermalPlant::check() const {
    if (!(heat_capacity_j_per_k > 0.0))
        throw ConfigError("thermal plant: heat capacity must be > 0");
    if (!(conductance_w_per_k > 0.0))
        throw ConfigError("thermal plant: conductance must be > 0");
    if (!(heater_max_w >= 0.0))
        throw ConfigError("thermal plant: heater limit must be >= 0");
    if (!(sensor_noise_k >= 0.0))
        throw ConfigError("thermal plant: sensor noise must be >= 0");
}

double plant_step(double t_k, double power_w, double dt_s,
                  const ThermalPlant& plant) {
    return t_k + dt_s *
                     (power_w - plant.conductance_w_per_k *
                                    (t_k - plant.bath_t_k)) /
                     plant.heat_capacity_j_per_k;
}

double plant_exact(double t0_k, double power_w, double dt_s,
                   const ThermalPlant& plant) {
    const double t_inf =
        plant.bath_t_k + power_w / plant.conductance_w_per_k;
    const double rate =
        plant.conductance_w_per_k / plant.heat_capacity_j_per_k;
    return t_inf + (t0_k - t_inf) * std::exp(-rate * dt_s);
}

void PidController::reset() {
    integral_w = 0.0;
    prev_error_k = 0.0;
    has_prev_error = false;
}

double pid_step(PidController& pid, double setpoint_k, double measured_k) {
    if (!(pid.sample_period_s > 0.0))
        throw AnalysisError("pid: sample period must be positive");
    const double error = setpoint_k - measured_k;
    const double derivative =
        pid.has_prev_error
            ? (error - pid.prev_error_k) / pid.sample_period_s
            : 0.0;
    const double grown_integral =
        pid.integral_w + pid.ki * error * pid.sample_period_s;
    const double unclamped =
        pid.kp * error + grown_integral + pid.kd * derivative;
    const double out =
        std::clamp(unclamped, pid.output_min_w, pid.output_max_w);
    // accumulate the integral unless that would push further into the clamp
    const bool winding_up =
        (unclamped > pid.output_max_w && error > 0.0) ||
        (unclamped < pid.output_min_w && error < 0.0);
    if (!winding_up) pid.integral_w = grown_integral;
    pid.prev_error_k = error;
    pid.has_prev_error = true;
    return out;
}

ControlRunResult simulate_control_run(const ThermalPlant& plant,
                                      PidController pid, double setpoint_k,
                                      double start_t_k, double duration_s,
                                      double dt_s, std::uint64_t seed,
                                      double settle_band_k) {
    plant.check();
    if (!(dt_s > 0.0))
        throw AnalysisError("control run: dt must be positive");
    const double limit =
        0.1 * plant.heat_capacity_j_per_k / plant.conductance_w_per_k;
    if (dt_s >= limit)
        throw AnalysisError("control run: dt too large for the explicit "
                            "integrator; need dt < 0.1 C / G");
    if (!(duration_s >= dt_s))
        throw AnalysisError("control run: duration shorter than one step");
    if (!(settle_band_k > 0.0))
        throw AnalysisError("control run: settle band must be positive");

    pid.output_max_w = std::min(pid.output_max_w, plant.heater_max_w);
    pid.reset();
    Rng rng(seed);

    const auto steps = static_cast<std::size_t>(std::llround(duration_s /
                                                             dt_s));
    const auto stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(pid.sample_period_s / dt_s)));
    pid.sample_period_s = double(stride) * dt_s;  // controller sees real cadence

    ControlRunResult res;
    res.trace.reserve(steps + 1);
    double t_k = start_t_k;
    double power = 0.0;
    for (std::size_t step = 0; step <= steps; ++step) {
        if (step % stride == 0) {
            const double measured =
                t_k + (plant.sensor_noise_k > 0.0
                           ? rng.gaussian(plant.sensor_noise_k)
                           : 0.0);
            power = pid_step(pid, setpoint_k, measured);
        }
        res.trace.push_back({double(step) * dt_s, t_k, power});
        if (step < steps) t_k = plant_step(t_k, power, dt_s, plant);
    }

    // steady stretch: everything after the last excursion out of the band
    std::size_t first_steady = res.trace.size();
    for (std::size_t i = res.trace.size(); i-- > 0;) {
        if (std::abs(res.trace[i].temperature_k - setpoint_k) >
            settle_band_k)
            break;
        first_steady = i;
    }
    auto& sum = res.summary;
    if (first_steady < res.trace.size()) {
        sum.settled = true;
        sum.settling_time_s = res.trace[first_steady].t_s;
        double mean_t = 0.0, mean_p = 0.0;
        double lo = res.trace[first_steady].temperature_k, hi = lo;
        const auto n = res.trace.size() - first_steady;
        for (std::size_t i = first_steady; i < res.trace.size(); ++i) {
            mean_t += res.trace[i].temperature_k;
            mean_p += res.trace[i].power_w;
            lo = std::min(lo, res.trace[i].temperature_k);
            hi = std::max(hi, res.trace[i].temperature_k);
        }
        sum.steady_mean_t_k = mean_t / double(n);
        sum.steady_mean_power_w = mean_p / double(n);
        sum.steady_peak_to_peak_k = hi - lo;
    } else {
        sum.settled = false;
        sum.settling_time_s = duration_s;
    }
    return res;
}

Ln2Budget ln2_budget(const ThermalPlant& plant, double t_op_k,
                     double parasitic_w, double fill_kg) {
    plant.check();
    if (t_op_k < plant.bath_t_k)
        throw AnalysisError("ln2 budget: operating point below the bath");
    if (parasitic_w < 0.0)
        throw AnalysisError("ln2 budget: negative parasitic load");
    if (!(fill_kg > 0.0))
        throw AnalysisError("ln2 budget: fill mass must be positive");
    Ln2Budget b;
    b.boiloff_w =
        plant.conductance_w_per_k * (t_op_k - plant.bath_t_k) + parasitic_w;
    const double kg_per_s = b.boiloff_w / ln2_latent_heat_j_per_kg;
    b.evaporation_g_per_h = kg_per_s * 1000.0 * 3600.0;
    b.endurance_h =
        b.boiloff_w > 0.0
            ? fill_kg / (kg_per_s * 3600.0)
            : std::numeric_limits<double>::infinity();
    return b;
}

}
