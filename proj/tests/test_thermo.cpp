#include <doctest.h>

#include <cmath>

#include "clicklab/errors.hpp"
#include "clicklab/thermo.hpp"

using namespace clicklab;

TEST_CASE("plant step follows the lumped heat balance") {
    ThermalPlant plant;  // 500 J/K, 0.056 W/K, 77 K bath
    CHECK(plant_step(100.0, 2.0, 0.5, plant) ==
          doctest::Approx(100.000712).epsilon(1e-12));
    // no drive, at bath temperature: nothing moves
    CHECK(plant_step(77.0, 0.0, 10.0, plant) == 77.0);
}

TEST_CASE("closed-form plant response") {
    ThermalPlant plant;
    CHECK(plant_exact(100.0, 2.0, 1000.0, plant) ==
          doctest::Approx(101.34715158320975).epsilon(1e-12));
    // the asymptote is bath + P/G
    CHECK(plant_exact(100.0, 6.5, 1e9, plant) ==
          doctest::Approx(193.07142857142856).epsilon(1e-9));
    CHECK(plant_exact(150.0, 0.0, 0.0, plant) == 150.0);
}

TEST_CASE("euler integration converges to the closed form at first order") {
    ThermalPlant plant;
    const double horizon = 2000.0;
    auto integrate = [&](double dt) {
        double t = 290.0;
        const int n = int(horizon / dt);
        for (int i = 0; i < n; ++i) t = plant_step(t, 5.0, dt, plant);
        return t;
    };
    const double exact = plant_exact(290.0, 5.0, horizon, plant);
    const double err_coarse = std::abs(integrate(4.0) - exact);
    const double err_fine = std::abs(integrate(2.0) - exact);
    CHECK(err_fine < err_coarse);
    CHECK(err_coarse / err_fine == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("plant validation") {
    ThermalPlant plant;
    CHECK_NOTHROW(plant.check());
    plant.heat_capacity_j_per_k = 0.0;
    CHECK_THROWS_AS(plant.check(), ConfigError);
    plant = ThermalPlant{};
    plant.conductance_w_per_k = -1.0;
    CHECK_THROWS_AS(plant.check(), ConfigError);
    plant = ThermalPlant{};
    plant.sensor_noise_k = -0.1;
    CHECK_THROWS_AS(plant.check(), ConfigError);
}

TEST_CASE("proportional term and output clamp") {
    PidController pid;
    pid.kp = 2.0;
    CHECK(pid_step(pid, 10.0, 7.0) == doctest::Approx(6.0));

    PidController hot;
    hot.kp = 10.0;
    CHECK(pid_step(hot, 10.0, 7.0) == 12.0);  // clamped at the heater limit
    CHECK(pid_step(hot, 10.0, 12.0) == 0.0);  // clamped at zero drive
}

TEST_CASE("integral accumulates only while the output is unclamped") {
    PidController pid;
    pid.kp = 1.0;
    pid.ki = 1.0;
    pid.sample_period_s = 0.1;
    CHECK(pid_step(pid, 10.0, 8.0) == doctest::Approx(2.2));
    CHECK(pid.integral_w == doctest::Approx(0.2));
    CHECK(pid_step(pid, 10.0, 9.0) == doctest::Approx(1.3));
    CHECK(pid.integral_w == doctest::Approx(0.3));

    PidController wound;
    wound.kp = 10.0;
    wound.ki = 1.0;
    wound.sample_period_s = 0.1;
    CHECK(pid_step(wound, 10.0, 7.0) == 12.0);
    CHECK(wound.integral_w == 0.0);  // anti-windup held it back
    CHECK(pid_step(wound, 10.0, 7.0) == 12.0);
    CHECK(wound.integral_w == 0.0);
}

TEST_CASE("derivative acts on the error change after the first sample") {
    PidController pid;
    pid.kd = 5.0;
    pid.sample_period_s = 0.1;
    pid.output_min_w = -100.0;
    pid.output_max_w = 100.0;
    CHECK(pid_step(pid, 10.0, 7.0) == 0.0);  // no history yet
    CHECK(pid_step(pid, 10.0, 8.0) == doctest::Approx(-50.0));

    PidController bad;
    bad.sample_period_s = 0.0;
    CHECK_THROWS_AS(pid_step(bad, 1.0, 0.0), AnalysisError);
}

TEST_CASE("closed loop settles onto the setpoint and holds it") {
    ThermalPlant plant;
    PidController pid;
    pid.kp = 5.0;
    pid.ki = 0.02;
    pid.sample_period_s = 1.0;
    auto run = simulate_control_run(plant, pid, 193.15, 290.0, 20'000.0,
                                    1.0, 1);
    const auto& s = run.summary;
    CHECK(s.settled);
    CHECK(s.settling_time_s < 15'000.0);
    CHECK(s.steady_mean_t_k == doctest::Approx(193.15).epsilon(2e-4));
    // holding 193.15 K against a 77 K bath costs G * dT
    CHECK(s.steady_mean_power_w == doctest::Approx(6.5044).epsilon(0.01));
    CHECK(run.trace.size() == 20'001);
    CHECK(run.trace.front().t_s == 0.0);
    CHECK(run.trace.front().temperature_k == 290.0);

    // a noiseless run is deterministic regardless of the seed
    auto other = simulate_control_run(plant, pid, 193.15, 290.0, 20'000.0,
                                      1.0, 99);
    CHECK(other.summary.steady_mean_t_k == s.steady_mean_t_k);
}

TEST_CASE("controller output is held between samples") {
    ThermalPlant plant;
    PidController pid;
    pid.kp = 5.0;
    pid.ki = 0.02;
    pid.sample_period_s = 1.0;
    auto run = simulate_control_run(plant, pid, 193.15, 290.0, 100.0, 0.25,
                                    1);
    REQUIRE(run.trace.size() == 401);
    for (std::size_t i = 0; i < run.trace.size(); ++i)
        if (i % 4 != 0)
            CHECK(run.trace[i].power_w == run.trace[i - 1].power_w);
}

TEST_CASE("sensor noise does not break settling") {
    ThermalPlant plant;
    plant.sensor_noise_k = 0.01;
    PidController pid;
    pid.kp = 5.0;
    pid.ki = 0.02;
    pid.sample_period_s = 1.0;
    auto run = simulate_control_run(plant, pid, 193.15, 290.0, 20'000.0,
                                    1.0, 2);
    CHECK(run.summary.settled);
    CHECK(run.summary.steady_mean_t_k == doctest::Approx(193.15).epsilon(1e-3));
}

TEST_CASE("control run input validation") {
    ThermalPlant plant;
    PidController pid;
    pid.kp = 1.0;
    // the explicit integrator needs dt well below C / G
    CHECK_THROWS_AS(simulate_control_run(plant, pid, 193.15, 290.0, 10'000.0,
                                         0.1 * 500.0 / 0.056, 1),
                    AnalysisError);
    CHECK_THROWS_AS(
        simulate_control_run(plant, pid, 193.15, 290.0, 10'000.0, 0.0, 1),
        AnalysisError);
    CHECK_THROWS_AS(
        simulate_control_run(plant, pid, 193.15, 290.0, 0.5, 1.0, 1),
        AnalysisError);
    CHECK_THROWS_AS(simulate_control_run(plant, pid, 193.15, 290.0, 10'000.0,
                                         1.0, 1, 0.0),
                    AnalysisError);
}

TEST_CASE("nitrogen budget from the steady heat load") {
    ThermalPlant plant;
    auto b = ln2_budget(plant, 193.15, 1.79, 14.4);
    CHECK(b.boiloff_w == doctest::Approx(8.2944).epsilon(1e-12));
    CHECK(b.evaporation_g_per_h ==
          doctest::Approx(150.0494472361809).epsilon(1e-12));
    CHECK(b.endurance_h == doctest::Approx(95.96836419753086).epsilon(1e-12));

    // the heater alone, no parasitics
    auto h = ln2_budget(plant, 193.15, 0.0, 14.4);
    CHECK(h.boiloff_w == doctest::Approx(6.5044).epsilon(1e-12));

    CHECK_THROWS_AS(ln2_budget(plant, 60.0, 1.79, 14.4), AnalysisError);
    CHECK_THROWS_AS(ln2_budget(plant, 193.15, -1.0, 14.4), AnalysisError);
    CHECK_THROWS_AS(ln2_budget(plant, 193.15, 1.79, 0.0), AnalysisError);
}
