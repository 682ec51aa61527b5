// Timing comparison of the serial reference kernels against their OpenMP
// counterparts: whole-chain controller evaluation, the integration step and
// the per-vehicle error energies. Also cross-checks that both execution
// policies produce bit-identical results on every measured problem.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "chainsim/analysis.hpp"
#include "chainsim/chain.hpp"
#include "chainsim/controller.hpp"
#include "chainsim/disturbance.hpp"
#include "chainsim/simulate.hpp"

using namespace chainsim;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_best_ms(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        fn();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void bench_case(int N, long steps, int reps) {
    const double dt = 0.1;
    SimulationConfig cfg{N, dt, steps};
    ControllerDefinition controller = nonlinear_comm_controller(1.0, 0.5, dt);
    DisturbanceProfile ramp{DisturbanceKind::RampStep, 1.0, 0.0};

    RunResult serial_run, parallel_run;
    const double t_serial = time_best_ms(reps, [&] {
        serial_run = simulate(cfg, controller, ramp, {Exec::Serial, false});
    });
    const double t_parallel = time_best_ms(reps, [&] {
        parallel_run = simulate(cfg, controller, ramp, {Exec::Parallel, false});
    });

    const bool match = bits_equal(serial_run.errors.e, parallel_run.errors.e) &&
                       bits_equal(serial_run.error_rates.e, parallel_run.error_rates.e);

    // isolated whole-chain controller evaluation on the final state
    ChainControls eval_serial, eval_parallel;
    const double t_eval_serial = time_best_ms(reps, [&] {
        eval_serial = evaluate_chain(controller, serial_run.final_state, 0.1, Exec::Serial);
    });
    const double t_eval_parallel = time_best_ms(reps, [&] {
        eval_parallel = evaluate_chain(controller, parallel_run.final_state, 0.1, Exec::Parallel);
    });
    const bool eval_match = bits_equal(eval_serial.u1, eval_parallel.u1) &&
                            bits_equal(eval_serial.u2, eval_parallel.u2) &&
                            bits_equal(eval_serial.next_xi, eval_parallel.next_xi);

    std::vector<double> energy_serial, energy_parallel;
    const double t_metric_serial = time_best_ms(
        reps, [&] { energy_serial = error_metric_per_vehicle(serial_run.errors, 2, Exec::Serial); });
    const double t_metric_parallel = time_best_ms(reps, [&] {
        energy_parallel = error_metric_per_vehicle(parallel_run.errors, 2, Exec::Parallel);
    });
    const bool metric_match = bits_equal(energy_serial, energy_parallel);

    std::printf("N=%-8d steps=%-5ld | sim      serial %9.2f ms  omp %9.2f ms  speedup %5.2fx  %s\n",
                N, steps, t_serial, t_parallel, t_serial / t_parallel,
                match ? "bit-identical" : "MISMATCH");
    std::printf("%-23s| evaluate serial %9.2f ms  omp %9.2f ms  speedup %5.2fx  %s\n", "",
                t_eval_serial, t_eval_parallel, t_eval_serial / t_eval_parallel,
                eval_match ? "bit-identical" : "MISMATCH");
    std::printf("%-23s| energies serial %9.2f ms  omp %9.2f ms  speedup %5.2fx  %s\n", "",
                t_metric_serial, t_metric_parallel, t_metric_serial / t_metric_parallel,
                metric_match ? "bit-identical" : "MISMATCH");
    if (!match || !eval_match || !metric_match) std::exit(1);
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--quick") quick = true;
    }
#ifdef _OPENMP
    std::printf("OpenMP: %d threads\n", omp_get_max_threads());
#else
    std::printf("OpenMP: not available, parallel policy falls back to serial\n");
#endif
    if (quick) {
        bench_case(1000, 50, 2);
        return 0;
    }
    bench_case(1000, 200, 3);
    bench_case(10000, 200, 3);
    bench_case(100000, 100, 3);
    bench_case(1000000, 20, 2);
    return 0;
}
